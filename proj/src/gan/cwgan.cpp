#include "jamdet/gan/cwgan.hpp"

#include "jamdet/ad/checkpoint.hpp"
#include "jamdet/ad/penalty.hpp"
#include "jamdet/error.hpp"
#include "jamdet/seed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace jamdet::gan {

using ad::Tensor;

namespace {

std::size_t read_size(const KeyValueFile& kv, const std::string& key, std::size_t fallback) {
    const long long v = kv.get_int_or(key, static_cast<long long>(fallback));
    if (v < 0) throw ParseError(kv.source(), 0, "key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> read_sizes(const KeyValueFile& kv, const std::string& key,
                                    const std::vector<std::size_t>& fallback) {
    std::vector<long long> def(fallback.begin(), fallback.end());
    std::vector<std::size_t> out;
    for (long long v : kv.get_int_list_or(key, def)) {
        if (v <= 0) throw ParseError(kv.source(), 0, "key '" + key + "' needs positive entries");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

Tensor normal_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    std::vector<double> v(rows * cols);
    for (auto& x : v) x = n01(rng);
    return Tensor::from({rows, cols}, std::move(v));
}

// Temporarily excludes a parameter set from gradient recording.
class FrozenScope {
public:
    explicit FrozenScope(const ad::ParameterList& params) {
        for (const auto& p : params)
            if (p.tensor.requires_grad()) {
                frozen_.push_back(p.tensor);
                frozen_.back().set_requires_grad(false);
            }
    }
    ~FrozenScope() {
        for (auto& t : frozen_) t.set_requires_grad(true);
    }
    FrozenScope(const FrozenScope&) = delete;
    FrozenScope& operator=(const FrozenScope&) = delete;

private:
    std::vector<Tensor> frozen_;
};

}  // namespace

void GanConfig::validate() const {
    if (!(lambda_gp >= 0.0) || n_critic < 1 || batch_size < 2 || epochs < 1 || latent_dim < 1)
        throw DomainError("GAN config needs lambda_gp >= 0, n_critic >= 1, batch_size >= 2, epochs >= 1");
    if (critic_channels.empty() || generator_channels.empty()) throw DomainError("GAN layer lists must be non-empty");
    if (!(critic_dropout >= 0.0 && critic_dropout < 1.0)) throw DomainError("critic dropout must lie in [0, 1)");
    if (kernel % 2 == 0) throw DomainError("GAN kernel size must be odd");
    if (round_size < 1) throw DomainError("augmentation round size must be positive");
}

void GanConfig::read(const KeyValueFile& kv, const std::string& prefix, std::set<std::string>& used) {
    auto key = [&](const char* k) {
        used.insert(prefix + k);
        return prefix + k;
    };
    lambda_gp = kv.get_double_or(key("lambda_gp"), lambda_gp);
    n_critic = read_size(kv, key("n_critic"), n_critic);
    batch_size = read_size(kv, key("batch_size"), batch_size);
    epochs = read_size(kv, key("epochs"), epochs);
    latent_dim = read_size(kv, key("latent_dim"), latent_dim);
    optimizer.kind = ad::parse_optimizer_kind(kv.get_or(key("optimizer"), ad::to_string(optimizer.kind)));
    optimizer.learning_rate = kv.get_double_or(key("learning_rate"), optimizer.learning_rate);
    optimizer.beta1 = kv.get_double_or(key("beta1"), optimizer.beta1);
    optimizer.beta2 = kv.get_double_or(key("beta2"), optimizer.beta2);
    optimizer.epsilon = kv.get_double_or(key("epsilon"), optimizer.epsilon);
    critic_channels = read_sizes(kv, key("critic_channels"), critic_channels);
    generator_channels = read_sizes(kv, key("generator_channels"), generator_channels);
    critic_dropout = kv.get_double_or(key("critic_dropout"), critic_dropout);
    leaky_slope = kv.get_double_or(key("leaky_slope"), leaky_slope);
    kernel = read_size(kv, key("kernel"), kernel);
    seed = static_cast<std::uint64_t>(kv.get_int_or(key("seed"), static_cast<long long>(seed)));
    per_class = read_size(kv, key("per_class"), per_class);
    round_size = read_size(kv, key("round_size"), round_size);
    validate();
}

void GanConfig::write(KeyValueFile& kv, const std::string& prefix) const {
    kv.set(prefix + "lambda_gp", lambda_gp);
    kv.set(prefix + "n_critic", static_cast<long long>(n_critic));
    kv.set(prefix + "batch_size", static_cast<long long>(batch_size));
    kv.set(prefix + "epochs", static_cast<long long>(epochs));
    kv.set(prefix + "latent_dim", static_cast<long long>(latent_dim));
    kv.set(prefix + "optimizer", ad::to_string(optimizer.kind));
    kv.set(prefix + "learning_rate", optimizer.learning_rate);
    kv.set(prefix + "beta1", optimizer.beta1);
    kv.set(prefix + "beta2", optimizer.beta2);
    kv.set(prefix + "epsilon", optimizer.epsilon);
    kv.set(prefix + "critic_channels", join(critic_channels));
    kv.set(prefix + "generator_channels", join(generator_channels));
    kv.set(prefix + "critic_dropout", critic_dropout);
    kv.set(prefix + "leaky_slope", leaky_slope);
    kv.set(prefix + "kernel", static_cast<long long>(kernel));
    kv.set(prefix + "seed", static_cast<long long>(seed));
    kv.set(prefix + "per_class", static_cast<long long>(per_class));
    kv.set(prefix + "round_size", static_cast<long long>(round_size));
}

Tensor label_channels(const std::vector<int>& labels, std::size_t length) {
    std::vector<double> v(labels.size() * 2 * length, 0.0);
    for (std::size_t b = 0; b < labels.size(); ++b) {
        if (labels[b] != 0 && labels[b] != 1) throw DomainError("condition label must be 0 or 1");
        const std::size_t c = static_cast<std::size_t>(labels[b]);
        std::fill_n(v.begin() + static_cast<long>((b * 2 + c) * length), length, 1.0);
    }
    return Tensor::from({labels.size(), 2, length}, std::move(v));
}

Generator::Generator(std::size_t q, const GanConfig& config, std::mt19937_64& rng)
    : q_(q), latent_dim_(config.latent_dim), slope_(config.leaky_slope) {
    const std::size_t pad = config.kernel / 2;
    embedding_ = Tensor::full({2, config.latent_dim}, 1.0, true);
    input_ = ad::Dense(config.latent_dim + 2, q, rng);
    std::size_t in = 1;
    for (std::size_t width : config.generator_channels) {
        convs_.emplace_back(in, width, config.kernel, 1, pad, rng);
        norms_.emplace_back(width);
        in = width;
    }
    output_ = ad::Conv1d(in, 1, config.kernel, 1, pad, rng);
}

Tensor Generator::forward(const Tensor& z, const std::vector<int>& labels, bool train) {
    const std::size_t B = labels.size();
    if (z.shape() != ad::Shape{B, latent_dim_})
        throw ShapeError("generator latent input " + ad::to_string(z.shape()) + ", expected " +
                         ad::to_string({B, latent_dim_}));
    const Tensor onehot = label_channels(labels, 1);
    const Tensor scaled = ad::mul(z, ad::matmul(ad::reshape(onehot, {B, 2}), embedding_));
    const Tensor cond = ad::concat_channels(ad::reshape(scaled, {B, latent_dim_, 1}), onehot);
    Tensor h = ad::reshape(input_.forward(ad::reshape(cond, {B, latent_dim_ + 2})), {B, 1, q_});
    for (std::size_t i = 0; i < convs_.size(); ++i)
        h = ad::leaky_relu(norms_[i].forward(convs_[i].forward(h), train), slope_);
    return ad::reshape(ad::tanh(output_.forward(h)), {B, q_});
}

ad::ParameterList Generator::parameters() const {
    ad::ParameterList out{{"generator.embedding", embedding_, true}};
    input_.collect("generator.input", out);
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        convs_[i].collect("generator.conv" + std::to_string(i), out);
        norms_[i].collect("generator.bn" + std::to_string(i), out);
    }
    output_.collect("generator.output", out);
    return out;
}

Critic::Critic(std::size_t q, const GanConfig& config, std::mt19937_64& rng)
    : q_(q), slope_(config.leaky_slope), dropout_(config.critic_dropout) {
    const std::size_t pad = config.kernel / 2;
    std::size_t in = 3, length = q;
    for (std::size_t i = 0; i < config.critic_channels.size(); ++i) {
        const std::size_t stride = i % 2 == 0 ? 2 : 1;
        convs_.emplace_back(in, config.critic_channels[i], config.kernel, stride, pad, rng);
        length = convs_.back().output_length(length);
        in = config.critic_channels[i];
    }
    head_ = ad::Dense(in * length, 1, rng);
}

Tensor Critic::forward(const Tensor& x, const std::vector<int>& labels, bool train, std::uint64_t dropout_seed) const {
    const std::size_t B = labels.size();
    if (x.shape() != ad::Shape{B, q_})
        throw ShapeError("critic input " + ad::to_string(x.shape()) + ", expected " + ad::to_string({B, q_}));
    Tensor h = ad::concat_channels(ad::reshape(x, {B, 1, q_}), label_channels(labels, q_));
    for (std::size_t i = 0; i < convs_.size(); ++i)
        h = ad::dropout(ad::leaky_relu(convs_[i].forward(h), slope_), dropout_, splitmix64(dropout_seed + i), train);
    return head_.forward(ad::reshape(h, {B, h.numel() / B}));
}

ad::ParameterList Critic::parameters() const {
    ad::ParameterList out;
    for (std::size_t i = 0; i < convs_.size(); ++i) convs_[i].collect("critic.conv" + std::to_string(i), out);
    head_.collect("critic.head", out);
    return out;
}

Tensor interpolate(const Tensor& real, const Tensor& fake, const std::vector<double>& eps) {
    if (real.shape() != fake.shape())
        throw ShapeError("interpolate: " + ad::to_string(real.shape()) + " vs " + ad::to_string(fake.shape()));
    const std::size_t B = real.size(0);
    if (eps.size() != B) throw ShapeError("interpolate: " + std::to_string(eps.size()) + " weights for " +
                                          std::to_string(B) + " rows");
    for (double e : eps)
        if (!(e >= 0.0 && e <= 1.0)) throw DomainError("interpolation weight outside [0, 1]");
    std::vector<double> w(eps);
    std::vector<double> w1(B);
    for (std::size_t b = 0; b < B; ++b) w1[b] = 1.0 - eps[b];
    const Tensor a = ad::row_broadcast(Tensor::from({B}, std::move(w)), real.shape());
    const Tensor c = ad::row_broadcast(Tensor::from({B}, std::move(w1)), real.shape());
    return ad::add(ad::mul_const(real, a), ad::mul_const(fake, c));
}

Tensor critic_loss(const Tensor& d_real, const Tensor& d_fake, const Tensor& gp) {
    return ad::add(ad::sub(ad::mean(d_fake), ad::mean(d_real)), ad::reshape(gp, {1}));
}

Tensor generator_loss(const Tensor& d_fake) { return ad::neg(ad::mean(d_fake)); }

PenaltyTerm gradient_penalty(const std::function<Tensor(const Tensor&)>& critic, const Tensor& x_hat, double lambda) {
    auto gp = ad::input_gradient_penalty(critic, x_hat);
    return {ad::scale(gp.penalty, lambda), gp.zero_norm_rows};
}

GanModel make_model(const GanConfig& config, std::size_t q) {
    config.validate();
    if (q == 0) throw DomainError("feature width must be positive");
    std::mt19937_64 rng(derive_seed(config.seed, Stage::Gan, 0));
    GanModel model;
    model.config = config;
    model.generator = Generator(q, config, rng);
    model.critic = Critic(q, config, rng);
    return model;
}

GanModel train(const GanConfig& config, const data::Dataset& ds) {
    ds.validate();
    if (!ds.normalized) throw DomainError("CWGAN-GP training needs a normalized dataset");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.observations[i].label].push_back(i);
    if (by_class[0].empty() || by_class[1].empty())
        throw DomainError("CWGAN-GP training needs both classes, got " + std::to_string(by_class[0].size()) + "/" +
                          std::to_string(by_class[1].size()));

    const std::size_t q = ds.feature_dim();
    GanModel model = make_model(config, q);
    const auto critic_params = model.critic.parameters();
    ad::Optimizer opt_c(config.optimizer, ad::trainable(critic_params));
    ad::Optimizer opt_g(config.optimizer, ad::trainable(model.generator.parameters()));

    std::mt19937_64 rng(derive_seed(config.seed, Stage::Gan, 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t B = config.batch_size;
    const std::size_t steps_per_epoch = (ds.size() + B - 1) / B;
    std::uint64_t dropout_counter = derive_seed(config.seed, Stage::Gan, 2);
    std::size_t step = 0;

    std::vector<int> labels(B);
    for (std::size_t b = 0; b < B; ++b) labels[b] = static_cast<int>(b % 2);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t s = 0; s < steps_per_epoch; ++s) {
            // Class-balanced real batch, features mapped to [-1, 1].
            std::vector<double> real_v(B * q);
            for (std::size_t b = 0; b < B; ++b) {
                const auto& pool = by_class[labels[b]];
                const auto& row = ds.observations[pool[rng() % pool.size()]].features;
                for (std::size_t j = 0; j < q; ++j) real_v[b * q + j] = 2.0 * row[j] - 1.0;
            }
            const Tensor real = Tensor::from({B, q}, std::move(real_v));

            LossRecord rec;
            for (std::size_t k = 0; k < config.n_critic; ++k) {
                Tensor fake;
                {
                    ad::NoGradGuard no_grad;
                    fake = model.generator.forward(normal_matrix(B, config.latent_dim, rng), labels, true).detach();
                }
                std::vector<double> eps(B);
                for (auto& e : eps) e = unit(rng);
                const std::uint64_t seed = dropout_counter;
                dropout_counter += 3 * config.critic_channels.size();

                opt_c.zero_grad();
                const Tensor d_real = model.critic.forward(real, labels, true, seed);
                const Tensor d_fake = model.critic.forward(fake, labels, true, seed + config.critic_channels.size());
                const auto gp = gradient_penalty(
                    [&](const Tensor& x) {
                        return model.critic.forward(x, labels, true, seed + 2 * config.critic_channels.size());
                    },
                    interpolate(real, fake, eps), config.lambda_gp);
                const Tensor loss = critic_loss(d_real, d_fake, gp.value);
                ad::backward(loss);
                opt_c.step();
                model.zero_norm_rows += gp.zero_norm_rows;
                rec.critic_loss = loss.item();
                rec.wasserstein = ad::mean(d_real).item() - ad::mean(d_fake).item();
            }

            opt_g.zero_grad();
            {
                FrozenScope frozen(critic_params);
                const Tensor fake = model.generator.forward(normal_matrix(B, config.latent_dim, rng), labels, true);
                const Tensor loss = generator_loss(model.critic.forward(fake, labels, true, dropout_counter));
                dropout_counter += config.critic_channels.size();
                ad::backward(loss);
                rec.gen_loss = loss.item();
            }
            opt_g.step();

            rec.step = ++step;
            rec.epoch = epoch;
            model.history.push_back(rec);
        }
    }
    return model;
}

std::vector<std::vector<double>> sample(Generator& generator, int label, std::size_t n, std::uint64_t seed) {
    std::vector<std::vector<double>> rows;
    if (n == 0) return rows;
    ad::NoGradGuard no_grad;
    std::mt19937_64 rng(seed);
    const Tensor out =
        generator.forward(normal_matrix(n, generator.latent_dim(), rng), std::vector<int>(n, label), false);
    const std::size_t q = generator.q();
    rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].resize(q);
        for (std::size_t j = 0; j < q; ++j) rows[i][j] = std::clamp((out[i * q + j] + 1.0) / 2.0, 0.0, 1.0);
    }
    return rows;
}

data::Dataset augment_to_balance(Generator& generator, const data::Dataset& ds, std::size_t per_class,
                                 std::size_t round_size, std::uint64_t seed) {
    ds.validate();
    if (round_size == 0) throw DomainError("round size must be positive");
    if (ds.feature_dim() != generator.q())
        throw ShapeError("generator width " + std::to_string(generator.q()) + " for " +
                         std::to_string(ds.feature_dim()) + " features");
    data::Dataset out = ds;
    std::size_t missing[2] = {0, 0};
    for (int label : {0, 1}) {
        const std::size_t have = ds.count(label);
        missing[label] = have < per_class ? per_class - have : 0;
    }
    for (std::uint64_t round = 0; missing[0] + missing[1] > 0; ++round)
        for (int label : {0, 1}) {
            const std::size_t n = std::min(round_size, missing[label]);
            if (n == 0) continue;
            for (auto& row : sample(generator, label, n, derive_seed(seed, Stage::Augment, 2 * round + label)))
                out.observations.push_back({std::move(row), label, true});
            missing[label] -= n;
        }
    return out;
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("wasserstein_1d needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = a.size(), m = b.size();
    if (n == m) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
        return acc / static_cast<double>(n);
    }
    // Quantile functions are step functions with jumps at i/n and j/m; walk
    // the merged breakpoints in units of 1/(n*m).
    std::size_t i = 0, j = 0, pos = 0;
    double acc = 0.0;
    const std::size_t end = n * m;
    while (pos < end) {
        const std::size_t next = std::min((i + 1) * m, (j + 1) * n);
        acc += std::abs(a[i] - b[j]) * static_cast<double>(next - pos);
        pos = next;
        if (pos == (i + 1) * m) ++i;
        if (pos == (j + 1) * n) ++j;
    }
    return acc / static_cast<double>(end);
}

std::string loss_history_csv(const std::vector<LossRecord>& history) {
    std::ostringstream out;
    out << "step,critic_loss,gen_loss,wasserstein_estimate\n";
    for (const auto& r : history)
        out << r.step << ',' << format_double(r.critic_loss) << ',' << format_double(r.gen_loss) << ','
            << format_double(r.wasserstein) << '\n';
    return out.str();
}

void write_loss_history(const std::string& path, const std::vector<LossRecord>& history) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << loss_history_csv(history);
    if (!out) throw IoError(path, "write failed");
}

void save_model(const GanModel& model, const std::string& path) {
    auto params = model.generator.parameters();
    const auto critic = model.critic.parameters();
    params.insert(params.end(), critic.begin(), critic.end());
    ad::save_checkpoint(path, params);
    KeyValueFile meta;
    model.config.write(meta, "gan.");
    meta.set("q", static_cast<long long>(model.generator.q()));
    meta.save(path + ".meta");
}

GanModel load_model(const std::string& path) {
    const auto meta = KeyValueFile::load(path + ".meta");
    GanConfig config;
    std::set<std::string> used;
    config.read(meta, "gan.", used);
    GanModel model = make_model(config, static_cast<std::size_t>(meta.get_int("q")));
    auto params = model.generator.parameters();
    const auto critic = model.critic.parameters();
    params.insert(params.end(), critic.begin(), critic.end());
    ad::assign_parameters(params, ad::load_checkpoint(path));
    return model;
}

}  // namespace jamdet::gan
