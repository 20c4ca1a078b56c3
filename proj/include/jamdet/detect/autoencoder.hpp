#pragma once

#include "jamdet/ad/nn.hpp"
#include "jamdet/ad/optim.hpp"
#include "jamdet/data/dataset.hpp"
#include "jamdet/kv.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace jamdet::detect {

enum class VariantKind { Cae, Cdae, Csae };

std::string to_string(VariantKind kind);  // "cae", "cdae", "csae"
VariantKind parse_variant_kind(const std::string& name);

// What the classifier head sees.
enum class ClassifierInput { Raw, ReconError };

// Defaults are the published detector hyperparameters for each variant.
struct VariantConfig {
    VariantKind kind = VariantKind::Cae;
    double noise_factor = 0.0;   // CDAE input corruption sigma
    double sparsity_rho = 0.05;  // CSAE target mean activation
    double sparsity_beta = 0.0;  // CSAE penalty weight; 0 disables
    std::size_t batch_size = 200;
    double learning_rate = 1e-4;
    double dropout = 0.2;
    std::size_t ae_epochs = 30;
    std::size_t classifier_epochs = 30;
    ad::OptimizerKind ae_optimizer = ad::OptimizerKind::Adam;
    ad::OptimizerKind classifier_optimizer = ad::OptimizerKind::Adam;
    std::vector<std::size_t> encoder_channels{32, 16, 8};
    std::size_t kernel = 3;
    std::size_t stride = 2;
    std::size_t fcn_hidden = 64;
    bool freeze_encoder = false;
    // ReconError variants only: route the error vector through the
    // transferred encoder before the FCN (false: FCN sees the error directly).
    bool error_through_encoder = true;
    double gamma = 0.5;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;

    static VariantConfig defaults(VariantKind kind);
    ClassifierInput classifier_input() const {
        return kind == VariantKind::Cae ? ClassifierInput::Raw : ClassifierInput::ReconError;
    }
    void validate() const;
    // Reads `prefix + key` entries (e.g. "cae.noise_factor"); every key read
    // is added to `used`. `kind` is not read: the prefix selects it.
    void read(const KeyValueFile& kv, const std::string& prefix, std::set<std::string>& used);
    void write(KeyValueFile& kv, const std::string& prefix) const;
};

// Stride-s convolutions (ReLU, dropout) down to a latent code, then
// transposed convolutions back to [B, Q]. Output padding is chosen per layer
// so the decoder inverts every encoder length exactly; the last layer ends
// in a sigmoid since features live in [0, 1].
class AutoencoderNet {
public:
    AutoencoderNet() = default;
    AutoencoderNet(std::size_t q, const VariantConfig& config, std::mt19937_64& rng);

    struct Pass {
        ad::Tensor code;        // [B, C_L, L_L] after ReLU
        ad::Tensor code_logit;  // same, before ReLU
        ad::Tensor output;      // [B, Q]
    };
    // x [B, Q].
    ad::Tensor encode(const ad::Tensor& x, bool train, std::uint64_t dropout_seed) const;
    Pass forward(const ad::Tensor& x, bool train, std::uint64_t dropout_seed) const;

    ad::ParameterList parameters() const;
    ad::ParameterList encoder_parameters() const;
    const std::vector<ad::Conv1d>& encoder() const { return encoder_; }
    std::size_t q() const { return q_; }
    std::size_t code_size() const { return code_size_; }
    std::size_t layers() const { return encoder_.size(); }

private:
    // (code, code_logit).
    std::pair<ad::Tensor, ad::Tensor> forward_code(const ad::Tensor& x, bool train, std::uint64_t dropout_seed) const;

    std::size_t q_ = 0;
    std::size_t code_size_ = 0;
    double dropout_ = 0.0;
    std::vector<ad::Conv1d> encoder_;
    std::vector<ad::ConvTranspose1d> decoder_;
};

struct EpochLoss {
    std::size_t epoch = 0;  // from 1
    double train = 0.0;
    double validation = 0.0;  // classifier only

    bool operator==(const EpochLoss&) const = default;
};

struct TrainedAutoencoder {
    AutoencoderNet net;
    std::vector<EpochLoss> history;  // mean batch loss per epoch
};

// Bernoulli KL sparsity penalty summed over units, rho_hat clamped to
// [1e-6, 1 - 1e-6].
double sparsity_penalty(double rho, const std::vector<double>& rho_hat, double beta);
ad::Tensor sparsity_penalty(double rho, const ad::Tensor& rho_hat, double beta);
inline constexpr double kSparsityClamp = 1e-6;

// Minimizes mean squared reconstruction error on normalized features. CDAE
// corrupts the input with N(0, noise_factor^2) and reconstructs the clean
// row; CSAE adds the sparsity penalty on per-batch mean sigmoid(code_logit).
TrainedAutoencoder train_autoencoder(const VariantConfig& config, const data::Dataset& train);

// |x - decode(encode(x))| per feature, dropout off.
std::vector<double> reconstruction_error(const AutoencoderNet& ae, const std::vector<double>& x);
std::vector<std::vector<double>> reconstruction_error(const AutoencoderNet& ae,
                                                      const std::vector<std::vector<double>>& rows);

// Rows stacked into [rows, width]; all rows must share a width.
ad::Tensor stack_rows(const std::vector<std::vector<double>>& rows, std::size_t begin, std::size_t end);

}  // namespace jamdet::detect
