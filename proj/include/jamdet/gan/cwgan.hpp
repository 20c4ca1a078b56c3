#pragma once

#include "jamdet/ad/nn.hpp"
#include "jamdet/ad/optim.hpp"
#include "jamdet/data/dataset.hpp"
#include "jamdet/kv.hpp"

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace jamdet::gan {

// Defaults are the published CWGAN-GP hyperparameters.
struct GanConfig {
    double lambda_gp = 20.0;
    std::size_t n_critic = 7;
    std::size_t batch_size = 64;
    std::size_t epochs = 20;
    std::size_t latent_dim = 128;
    ad::OptimizerConfig optimizer{ad::OptimizerKind::Adam, 1e-4, 0.5, 0.9, 1e-8};
    std::vector<std::size_t> critic_channels{32, 64, 128, 256, 512};
    std::vector<std::size_t> generator_channels{128, 64};
    double critic_dropout = 0.5;
    double leaky_slope = 0.2;
    std::size_t kernel = 3;
    std::uint64_t seed = 0;
    // Augmentation target and sampling round.
    std::size_t per_class = 2500;
    std::size_t round_size = 250;

    void validate() const;
    // Reads `prefix + key` entries (e.g. "gan.lambda_gp"); every key read is
    // added to `used`.
    void read(const KeyValueFile& kv, const std::string& prefix, std::set<std::string>& used);
    void write(KeyValueFile& kv, const std::string& prefix) const;
};

// Tensors of one-hot labels broadcast along a length: [B, 2, length].
ad::Tensor label_channels(const std::vector<int>& labels, std::size_t length);

// G(z|y): concat(z * embed(y), onehot(y)) -> dense(Q) -> [B,1,Q] -> per hidden width:
// conv(k, stride 1) + batchnorm + leaky relu -> conv to 1 channel -> tanh.
class Generator {
public:
    Generator() = default;
    Generator(std::size_t q, const GanConfig& config, std::mt19937_64& rng);

    // z [B, latent_dim] -> [B, Q] in [-1, 1].
    ad::Tensor forward(const ad::Tensor& z, const std::vector<int>& labels, bool train);
    ad::ParameterList parameters() const;
    std::size_t q() const { return q_; }
    std::size_t latent_dim() const { return latent_dim_; }

private:
    std::size_t q_ = 0;
    std::size_t latent_dim_ = 0;
    double slope_ = 0.2;
    ad::Tensor embedding_;  // [2, latent_dim], one learned scale vector per class, initialized to 1
    ad::Dense input_;
    std::vector<ad::Conv1d> convs_;
    std::vector<ad::BatchNorm1d> norms_;
    ad::Conv1d output_;
};

// D(x|y): [B,Q] plus two label channels -> convs (strides 2,1,2,1,...,
// leaky relu, dropout, no normalization) -> flatten -> dense(1).
class Critic {
public:
    Critic() = default;
    Critic(std::size_t q, const GanConfig& config, std::mt19937_64& rng);

    // x [B, Q] -> [B, 1].
    ad::Tensor forward(const ad::Tensor& x, const std::vector<int>& labels, bool train,
                       std::uint64_t dropout_seed) const;
    ad::ParameterList parameters() const;
    std::size_t q() const { return q_; }

private:
    std::size_t q_ = 0;
    double slope_ = 0.2;
    double dropout_ = 0.5;
    std::vector<ad::Conv1d> convs_;
    ad::Dense head_;
};

// eps * real + (1 - eps) * fake, one eps per row.
ad::Tensor interpolate(const ad::Tensor& real, const ad::Tensor& fake, const std::vector<double>& eps);
// -mean(d_real) + mean(d_fake) + gp, gp already scaled by lambda.
ad::Tensor critic_loss(const ad::Tensor& d_real, const ad::Tensor& d_fake, const ad::Tensor& gp);
ad::Tensor generator_loss(const ad::Tensor& d_fake);

struct PenaltyTerm {
    ad::Tensor value;  // lambda * mean((||grad|| - 1)^2)
    std::size_t zero_norm_rows = 0;
};
PenaltyTerm gradient_penalty(const std::function<ad::Tensor(const ad::Tensor&)>& critic, const ad::Tensor& x_hat,
                             double lambda);

struct LossRecord {
    std::size_t step = 0;   // generator step, from 1
    std::size_t epoch = 0;  // from 1
    double critic_loss = 0.0;
    double gen_loss = 0.0;
    double wasserstein = 0.0;  // mean d_real - mean d_fake, last critic step

    bool operator==(const LossRecord&) const = default;
};

struct GanModel {
    GanConfig config;
    Generator generator;
    Critic critic;
    std::vector<LossRecord> history;
    std::size_t zero_norm_rows = 0;  // rows that hit the zero-gradient subgradient
};

// Untrained networks for features of width q.
GanModel make_model(const GanConfig& config, std::size_t q);

// Alternating optimization on a normalized two-class dataset. Features are
// mapped to [-1, 1] for training. Each epoch has ceil(N / batch) generator
// steps; each generator step follows n_critic critic steps on one
// class-balanced real batch.
GanModel train(const GanConfig& config, const data::Dataset& ds);

// n generated rows of class `label`, mapped back to [0, 1] and clamped.
std::vector<std::vector<double>> sample(Generator& generator, int label, std::size_t n, std::uint64_t seed);

// Real rows unchanged, then generated rows in rounds of `round_size` until
// each class has per_class rows. Classes already at or above per_class are
// left alone.
data::Dataset augment_to_balance(Generator& generator, const data::Dataset& ds, std::size_t per_class,
                                 std::size_t round_size, std::uint64_t seed);

// Earth mover's distance between two empirical 1-D distributions via
// quantile alignment.
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

std::string loss_history_csv(const std::vector<LossRecord>& history);
void write_loss_history(const std::string& path, const std::vector<LossRecord>& history);

// Parameters in `path`, configuration and q in `path + ".meta"`.
void save_model(const GanModel& model, const std::string& path);
GanModel load_model(const std::string& path);

}  // namespace jamdet::gan
