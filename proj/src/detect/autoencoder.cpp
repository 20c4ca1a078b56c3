#include "jamdet/detect/autoencoder.hpp"

#include "jamdet/error.hpp"
#include "jamdet/seed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jamdet::detect {

using ad::Tensor;

namespace {

std::size_t read_size(const KeyValueFile& kv, const std::string& key, std::size_t fallback) {
    const long long v = kv.get_int_or(key, static_cast<long long>(fallback));
    if (v < 0) throw ParseError(kv.source(), 0, "key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

constexpr std::size_t kInferenceChunk = 512;

}  // namespace

std::string to_string(VariantKind kind) {
    switch (kind) {
        case VariantKind::Cae: return "cae";
        case VariantKind::Cdae: return "cdae";
        case VariantKind::Csae: return "csae";
    }
    return "?";
}

VariantKind parse_variant_kind(const std::string& name) {
    if (name == "cae") return VariantKind::Cae;
    if (name == "cdae") return VariantKind::Cdae;
    if (name == "csae") return VariantKind::Csae;
    throw DomainError("unknown detector variant '" + name + "' (expected cae, cdae or csae)");
}

VariantConfig VariantConfig::defaults(VariantKind kind) {
    VariantConfig c;
    c.kind = kind;
    switch (kind) {
        case VariantKind::Cae:
            break;
        case VariantKind::Cdae:
            c.noise_factor = 0.3;
            c.ae_epochs = 15;
            c.ae_optimizer = ad::OptimizerKind::Adagrad;
            break;
        case VariantKind::Csae:
            c.sparsity_beta = 0.01;
            c.ae_epochs = 15;
            c.ae_optimizer = ad::OptimizerKind::Sgd;
            break;
    }
    return c;
}

void VariantConfig::validate() const {
    if (!(noise_factor >= 0.0)) throw DomainError("noise_factor must be >= 0");
    if (!(sparsity_rho > 0.0 && sparsity_rho < 1.0)) throw DomainError("sparsity_rho must lie in (0, 1)");
    if (!(sparsity_beta >= 0.0)) throw DomainError("sparsity_beta must be >= 0");
    if (batch_size < 1 || ae_epochs < 1 || classifier_epochs < 1)
        throw DomainError("detector batch size and epoch counts must be positive");
    if (!(learning_rate > 0.0)) throw DomainError("detector learning rate must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw DomainError("detector dropout must lie in [0, 1)");
    if (encoder_channels.empty()) throw DomainError("encoder needs at least one layer");
    for (auto c : encoder_channels)
        if (c == 0) throw DomainError("encoder widths must be positive");
    if (kernel % 2 == 0 || stride < 1 || stride > kernel) throw DomainError("need odd kernel and 1 <= stride <= kernel");
    if (fcn_hidden < 1) throw DomainError("fcn_hidden must be positive");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw DomainError("validation_fraction must lie in (0, 1)");
    if (!std::isfinite(gamma)) throw DomainError("gamma must be finite");
}

void VariantConfig::read(const KeyValueFile& kv, const std::string& prefix, std::set<std::string>& used) {
    auto key = [&](const char* k) {
        used.insert(prefix + k);
        return prefix + k;
    };
    noise_factor = kv.get_double_or(key("noise_factor"), noise_factor);
    sparsity_rho = kv.get_double_or(key("sparsity_rho"), sparsity_rho);
    sparsity_beta = kv.get_double_or(key("sparsity_beta"), sparsity_beta);
    batch_size = read_size(kv, key("batch_size"), batch_size);
    learning_rate = kv.get_double_or(key("learning_rate"), learning_rate);
    dropout = kv.get_double_or(key("dropout"), dropout);
    ae_epochs = read_size(kv, key("ae_epochs"), ae_epochs);
    classifier_epochs = read_size(kv, key("classifier_epochs"), classifier_epochs);
    ae_optimizer = ad::parse_optimizer_kind(kv.get_or(key("ae_optimizer"), ad::to_string(ae_optimizer)));
    classifier_optimizer =
        ad::parse_optimizer_kind(kv.get_or(key("classifier_optimizer"), ad::to_string(classifier_optimizer)));
    std::vector<long long> widths(encoder_channels.begin(), encoder_channels.end());
    encoder_channels.clear();
    for (long long v : kv.get_int_list_or(key("encoder_channels"), widths)) {
        if (v <= 0) throw ParseError(kv.source(), 0, "key '" + prefix + "encoder_channels' needs positive entries");
        encoder_channels.push_back(static_cast<std::size_t>(v));
    }
    kernel = read_size(kv, key("kernel"), kernel);
    stride = read_size(kv, key("stride"), stride);
    fcn_hidden = read_size(kv, key("fcn_hidden"), fcn_hidden);
    freeze_encoder = kv.get_bool_or(key("freeze_encoder"), freeze_encoder);
    error_through_encoder = kv.get_bool_or(key("error_through_encoder"), error_through_encoder);
    gamma = kv.get_double_or(key("gamma"), gamma);
    validation_fraction = kv.get_double_or(key("validation_fraction"), validation_fraction);
    seed = static_cast<std::uint64_t>(kv.get_int_or(key("seed"), static_cast<long long>(seed)));
    validate();
}

void VariantConfig::write(KeyValueFile& kv, const std::string& prefix) const {
    kv.set(prefix + "noise_factor", noise_factor);
    kv.set(prefix + "sparsity_rho", sparsity_rho);
    kv.set(prefix + "sparsity_beta", sparsity_beta);
    kv.set(prefix + "batch_size", static_cast<long long>(batch_size));
    kv.set(prefix + "learning_rate", learning_rate);
    kv.set(prefix + "dropout", dropout);
    kv.set(prefix + "ae_epochs", static_cast<long long>(ae_epochs));
    kv.set(prefix + "classifier_epochs", static_cast<long long>(classifier_epochs));
    kv.set(prefix + "ae_optimizer", ad::to_string(ae_optimizer));
    kv.set(prefix + "classifier_optimizer", ad::to_string(classifier_optimizer));
    kv.set(prefix + "encoder_channels", join(encoder_channels));
    kv.set(prefix + "kernel", static_cast<long long>(kernel));
    kv.set(prefix + "stride", static_cast<long long>(stride));
    kv.set(prefix + "fcn_hidden", static_cast<long long>(fcn_hidden));
    kv.set(prefix + "freeze_encoder", freeze_encoder);
    kv.set(prefix + "error_through_encoder", error_through_encoder);
    kv.set(prefix + "gamma", gamma);
    kv.set(prefix + "validation_fraction", validation_fraction);
    kv.set(prefix + "seed", static_cast<long long>(seed));
}

AutoencoderNet::AutoencoderNet(std::size_t q, const VariantConfig& config, std::mt19937_64& rng)
    : q_(q), dropout_(config.dropout) {
    config.validate();
    const std::size_t pad = config.kernel / 2;
    std::vector<std::size_t> lengths{q};
    std::size_t in = 1;
    for (std::size_t width : config.encoder_channels) {
        if (lengths.back() < config.kernel)
            throw DomainError("feature width " + std::to_string(q) + " too short for " +
                              std::to_string(config.encoder_channels.size()) + " encoder layers");
        encoder_.emplace_back(in, width, config.kernel, config.stride, pad, rng);
        lengths.push_back(encoder_.back().output_length(lengths.back()));
        in = width;
    }
    code_size_ = in * lengths.back();
    for (std::size_t i = encoder_.size(); i-- > 0;) {
        const std::size_t out = i == 0 ? 1 : config.encoder_channels[i - 1];
        const std::size_t base =
            ad::conv1d_transpose_output_length(lengths[i + 1], config.kernel, config.stride, pad, 0);
        if (lengths[i] < base || lengths[i] - base >= config.stride)
            throw DomainError("decoder cannot invert encoder length " + std::to_string(lengths[i]));
        decoder_.emplace_back(in, out, config.kernel, config.stride, pad, lengths[i] - base, rng);
        in = out;
    }
}

Tensor AutoencoderNet::encode(const Tensor& x, bool train, std::uint64_t dropout_seed) const {
    return forward_code(x, train, dropout_seed).first;
}

std::pair<Tensor, Tensor> AutoencoderNet::forward_code(const Tensor& x, bool train,
                                                       std::uint64_t dropout_seed) const {
    if (x.dim() != 2 || x.size(1) != q_)
        throw ShapeError("autoencoder input " + ad::to_string(x.shape()) + ", expected [B," + std::to_string(q_) +
                         "]");
    const std::size_t B = x.size(0);
    Tensor h = ad::reshape(x, {B, 1, q_});
    Tensor logit;
    for (std::size_t i = 0; i < encoder_.size(); ++i) {
        logit = encoder_[i].forward(h);
        h = ad::dropout(ad::relu(logit), dropout_, splitmix64(dropout_seed + i), train);
    }
    return {h, logit};
}

AutoencoderNet::Pass AutoencoderNet::forward(const Tensor& x, bool train, std::uint64_t dropout_seed) const {
    auto [code, logit] = forward_code(x, train, dropout_seed);
    Tensor h = code;
    for (std::size_t i = 0; i < decoder_.size(); ++i) {
        h = decoder_[i].forward(h);
        h = i + 1 < decoder_.size() ? ad::relu(h) : ad::sigmoid(h);
    }
    return {code, logit, ad::reshape(h, {x.size(0), q_})};
}

ad::ParameterList AutoencoderNet::encoder_parameters() const {
    ad::ParameterList out;
    for (std::size_t i = 0; i < encoder_.size(); ++i) encoder_[i].collect("autoencoder.conv" + std::to_string(i), out);
    return out;
}

ad::ParameterList AutoencoderNet::parameters() const {
    ad::ParameterList out = encoder_parameters();
    for (std::size_t i = 0; i < decoder_.size(); ++i) decoder_[i].collect("autoencoder.deconv" + std::to_string(i), out);
    return out;
}

double sparsity_penalty(double rho, const std::vector<double>& rho_hat, double beta) {
    double acc = 0.0;
    for (double r : rho_hat) {
        const double p = std::clamp(r, kSparsityClamp, 1.0 - kSparsityClamp);
        acc += rho * std::log(rho / p) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - p));
    }
    return beta * acc;
}

Tensor sparsity_penalty(double rho, const Tensor& rho_hat, double beta) {
    const Tensor p = ad::clamp(rho_hat, kSparsityClamp, 1.0 - kSparsityClamp);
    const double n = static_cast<double>(p.numel());
    // rho*ln(rho) + (1-rho)*ln(1-rho) per unit, minus the cross terms.
    const double self = rho * std::log(rho) + (1.0 - rho) * std::log(1.0 - rho);
    const Tensor cross = ad::add(ad::scale(ad::sum(ad::log(p)), rho),
                                 ad::scale(ad::sum(ad::log(ad::add_scalar(ad::neg(p), 1.0))), 1.0 - rho));
    return ad::scale(ad::add_scalar(ad::neg(cross), n * self), beta);
}

Tensor stack_rows(const std::vector<std::vector<double>>& rows, std::size_t begin, std::size_t end) {
    if (begin >= end || end > rows.size()) throw DomainError("empty row range");
    const std::size_t q = rows[begin].size();
    std::vector<double> v;
    v.reserve((end - begin) * q);
    for (std::size_t i = begin; i < end; ++i) {
        if (rows[i].size() != q) throw ShapeError("row " + std::to_string(i) + " has width " +
                                                  std::to_string(rows[i].size()) + ", expected " + std::to_string(q));
        v.insert(v.end(), rows[i].begin(), rows[i].end());
    }
    return Tensor::from({end - begin, q}, std::move(v));
}

TrainedAutoencoder train_autoencoder(const VariantConfig& config, const data::Dataset& train) {
    config.validate();
    train.validate();
    if (!train.normalized) throw DomainError("autoencoder training needs normalized features");
    if (train.size() == 0) throw DomainError("autoencoder training needs at least one row");
    const std::size_t q = train.feature_dim();

    std::mt19937_64 init(derive_seed(config.seed, Stage::Autoencoder, 0));
    TrainedAutoencoder out{AutoencoderNet(q, config, init), {}};
    const auto params = out.net.parameters();
    ad::Optimizer opt({config.ae_optimizer, config.learning_rate}, ad::trainable(params));

    // Shuffling and corruption draw from separate streams so that a zero
    // noise factor leaves every other random choice unchanged.
    std::mt19937_64 order_rng(derive_seed(config.seed, Stage::Autoencoder, 1));
    std::mt19937_64 noise_rng(derive_seed(config.seed, Stage::Autoencoder, 2));
    std::uint64_t dropout_counter = derive_seed(config.seed, Stage::Autoencoder, 3);
    std::normal_distribution<double> n01;

    std::vector<std::vector<double>> rows;
    rows.reserve(train.size());
    for (const auto& o : train.observations) rows.push_back(o.features);
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<double>> batch_rows;

    for (std::size_t epoch = 1; epoch <= config.ae_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), order_rng);
        double total = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch_rows.clear();
            for (std::size_t i = start; i < end; ++i) batch_rows.push_back(rows[order[i]]);
            const Tensor clean = stack_rows(batch_rows, 0, batch_rows.size());
            Tensor input = clean;
            if (config.noise_factor > 0.0) {
                std::vector<double> noisy(clean.values().begin(), clean.values().end());
                for (auto& v : noisy) v += config.noise_factor * n01(noise_rng);
                input = Tensor::from(clean.shape(), std::move(noisy));
            }

            opt.zero_grad();
            const auto pass = out.net.forward(input, true, dropout_counter);
            dropout_counter += out.net.layers();
            Tensor loss = ad::mse(pass.output, clean);
            if (config.sparsity_beta > 0.0) {
                const std::size_t B = end - start;
                const Tensor act = ad::sigmoid(ad::reshape(pass.code_logit, {B, out.net.code_size()}));
                const Tensor rho_hat = ad::scale(ad::row_sum(ad::transpose(act)), 1.0 / static_cast<double>(B));
                loss = ad::add(loss, sparsity_penalty(config.sparsity_rho, rho_hat, config.sparsity_beta));
            }
            ad::backward(loss);
            opt.step();
            total += loss.item();
            ++batches;
        }
        out.history.push_back({epoch, total / static_cast<double>(batches), 0.0});
    }
    return out;
}

std::vector<std::vector<double>> reconstruction_error(const AutoencoderNet& ae,
                                                      const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    ad::NoGradGuard no_grad;
    for (std::size_t start = 0; start < rows.size(); start += kInferenceChunk) {
        const std::size_t end = std::min(rows.size(), start + kInferenceChunk);
        const Tensor x = stack_rows(rows, start, end);
        const Tensor y = ae.forward(x, false, 0).output;
        const std::size_t q = ae.q();
        for (std::size_t i = 0; i < end - start; ++i) {
            std::vector<double> e(q);
            for (std::size_t j = 0; j < q; ++j) e[j] = std::abs(x[i * q + j] - y[i * q + j]);
            out.push_back(std::move(e));
        }
    }
    return out;
}

std::vector<double> reconstruction_error(const AutoencoderNet& ae, const std::vector<double>& x) {
    return reconstruction_error(ae, std::vector<std::vector<double>>{x}).front();
}

}  // namespace jamdet::detect
