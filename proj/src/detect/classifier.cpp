#include "jamdet/detect/classifier.hpp"

#include "jamdet/ad/checkpoint.hpp"
#include "jamdet/error.hpp"
#include "jamdet/seed.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace jamdet::detect {

using ad::Tensor;

namespace {

constexpr std::size_t kInferenceChunk = 512;

ad::Conv1d copy_layer(const ad::Conv1d& src, bool trainable) {
    ad::Conv1d out;
    out.weight = src.weight.detach();
    out.bias = src.bias.detach();
    out.weight.set_requires_grad(trainable);
    out.bias.set_requires_grad(trainable);
    out.stride = src.stride;
    out.padding = src.padding;
    return out;
}

std::vector<std::vector<double>> feature_rows(const data::Dataset& ds) {
    std::vector<std::vector<double>> rows;
    rows.reserve(ds.size());
    for (const auto& o : ds.observations) rows.push_back(o.features);
    return rows;
}

}  // namespace

ClassifierModel make_classifier(std::size_t q, const VariantConfig& config, const std::vector<ad::Conv1d>* encoder) {
    config.validate();
    ClassifierModel m;
    m.q_ = q;
    m.dropout_ = config.dropout;
    m.gamma_ = config.gamma;
    m.input_ = config.classifier_input();
    std::size_t features = q;
    if (encoder) {
        std::size_t length = q;
        for (const auto& layer : *encoder) {
            m.encoder_.push_back(copy_layer(layer, !config.freeze_encoder));
            length = layer.output_length(length);
        }
        features = encoder->back().weight.size(0) * length;
    }
    std::mt19937_64 rng(derive_seed(config.seed, Stage::Classifier, 0));
    m.hidden_ = ad::Dense(features, config.fcn_hidden, rng);
    m.output_ = ad::Dense(config.fcn_hidden, 1, rng);
    return m;
}

ClassifierModel transfer_weights(const AutoencoderNet& ae, const VariantConfig& config) {
    const bool through = config.classifier_input() == ClassifierInput::Raw || config.error_through_encoder;
    return make_classifier(ae.q(), config, through ? &ae.encoder() : nullptr);
}

Tensor ClassifierModel::forward(const Tensor& x, bool train, std::uint64_t dropout_seed) const {
    if (x.dim() != 2 || x.size(1) != q_)
        throw ShapeError("classifier input " + ad::to_string(x.shape()) + ", expected [B," + std::to_string(q_) + "]");
    const std::size_t B = x.size(0);
    Tensor h = x;
    if (!encoder_.empty()) {
        h = ad::reshape(x, {B, 1, q_});
        for (std::size_t i = 0; i < encoder_.size(); ++i)
            h = ad::dropout(ad::relu(encoder_[i].forward(h)), dropout_, splitmix64(dropout_seed + i), train);
        h = ad::reshape(h, {B, h.numel() / B});
    }
    h = ad::dropout(ad::relu(hidden_.forward(h)), dropout_, splitmix64(dropout_seed + encoder_.size()), train);
    return ad::sigmoid(output_.forward(h));
}

ad::ParameterList ClassifierModel::encoder_parameters() const {
    ad::ParameterList out;
    for (std::size_t i = 0; i < encoder_.size(); ++i) encoder_[i].collect("classifier.conv" + std::to_string(i), out);
    return out;
}

ad::ParameterList ClassifierModel::head_parameters() const {
    ad::ParameterList out;
    hidden_.collect("classifier.hidden", out);
    output_.collect("classifier.output", out);
    return out;
}

ad::ParameterList ClassifierModel::parameters() const {
    auto out = encoder_parameters();
    const auto head = head_parameters();
    out.insert(out.end(), head.begin(), head.end());
    return out;
}

data::Dataset classifier_inputs(const AutoencoderNet& ae, ClassifierInput input, const data::Dataset& ds) {
    if (input == ClassifierInput::Raw || ds.size() == 0) return ds;
    data::Dataset out = ds;
    const auto errors = reconstruction_error(ae, feature_rows(ds));
    for (std::size_t i = 0; i < ds.size(); ++i) out.observations[i].features = errors[i];
    return out;
}

TrainedClassifier train_classifier(ClassifierModel model, const VariantConfig& config, const data::Dataset& inputs) {
    config.validate();
    inputs.validate();
    if (inputs.count(0) < 2 || inputs.count(1) < 2)
        throw DomainError("classifier training needs at least two rows of each class, got " +
                          std::to_string(inputs.count(0)) + "/" + std::to_string(inputs.count(1)));
    if (inputs.feature_dim() != model.q())
        throw ShapeError("classifier width " + std::to_string(model.q()) + " for " +
                         std::to_string(inputs.feature_dim()) + " features");

    auto [train, validation] =
        data::split_train_test(inputs, 1.0 - config.validation_fraction, derive_seed(config.seed, Stage::Classifier, 1));
    std::vector<Tensor> params = ad::trainable(model.head_parameters());
    if (!config.freeze_encoder)
        for (const auto& t : ad::trainable(model.encoder_parameters())) params.push_back(t);
    ad::Optimizer opt({config.classifier_optimizer, config.learning_rate}, std::move(params));

    std::mt19937_64 order_rng(derive_seed(config.seed, Stage::Classifier, 2));
    std::uint64_t dropout_counter = derive_seed(config.seed, Stage::Classifier, 3);
    const auto rows = feature_rows(train);
    const auto val_rows = feature_rows(validation);
    std::vector<double> val_targets;
    for (const auto& o : validation.observations) val_targets.push_back(o.label);
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);

    TrainedClassifier out;
    out.train_rows = train.size();
    out.validation_rows = validation.size();
    std::vector<std::vector<double>> batch_rows;
    for (std::size_t epoch = 1; epoch <= config.classifier_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), order_rng);
        double total = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch_rows.clear();
            std::vector<double> targets;
            for (std::size_t i = start; i < end; ++i) {
                batch_rows.push_back(rows[order[i]]);
                targets.push_back(train.observations[order[i]].label);
            }
            opt.zero_grad();
            const Tensor score = model.forward(stack_rows(batch_rows, 0, batch_rows.size()), true, dropout_counter);
            dropout_counter += model.encoder().size() + 1;
            const Tensor loss = ad::bce(score, Tensor::from({end - start, 1}, std::move(targets)));
            ad::backward(loss);
            opt.step();
            total += loss.item();
            ++batches;
        }
        const auto val_scores = scores(model, val_rows);
        const Tensor val_loss = ad::bce(Tensor::from({val_scores.size(), 1}, val_scores),
                                        Tensor::from({val_targets.size(), 1}, val_targets));
        out.history.push_back({epoch, total / static_cast<double>(batches), val_loss.item()});
    }
    out.model = std::move(model);
    return out;
}

std::vector<double> scores(const ClassifierModel& model, const std::vector<std::vector<double>>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    ad::NoGradGuard no_grad;
    for (std::size_t start = 0; start < rows.size(); start += kInferenceChunk) {
        const std::size_t end = std::min(rows.size(), start + kInferenceChunk);
        const Tensor s = model.forward(stack_rows(rows, start, end), false, 0);
        out.insert(out.end(), s.values().begin(), s.values().end());
    }
    return out;
}

Decision classify(const ClassifierModel& model, const std::vector<double>& x, double gamma) {
    const double s = scores(model, {x}).front();
    return {s, threshold(s, gamma)};
}

std::vector<double> Detector::predict_scores(const std::vector<std::vector<double>>& rows) const {
    if (classifier.input() == ClassifierInput::Raw) return scores(classifier, rows);
    return scores(classifier, reconstruction_error(autoencoder, rows));
}

std::vector<int> Detector::predict(const std::vector<std::vector<double>>& rows) const {
    std::vector<int> labels;
    for (double s : predict_scores(rows)) labels.push_back(threshold(s, classifier.gamma()));
    return labels;
}

Detector train_detector(const VariantConfig& config, const data::Dataset& train) {
    auto ae = train_autoencoder(config, train);
    auto clf = train_classifier(transfer_weights(ae.net, config), config,
                                classifier_inputs(ae.net, config.classifier_input(), train));
    return {config, std::move(ae.net), std::move(clf.model), std::move(ae.history), std::move(clf.history)};
}

std::string loss_history_csv(const Detector& detector) {
    std::ostringstream out;
    out << "stage,epoch,train_loss,validation_loss\n";
    for (const auto& r : detector.ae_history) out << "autoencoder," << r.epoch << ',' << format_double(r.train) << ",\n";
    for (const auto& r : detector.classifier_history)
        out << "classifier," << r.epoch << ',' << format_double(r.train) << ',' << format_double(r.validation) << '\n';
    return out.str();
}

void write_loss_history(const std::string& path, const Detector& detector) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << loss_history_csv(detector);
    if (!out) throw IoError(path, "write failed");
}

namespace {

ad::ParameterList all_parameters(const Detector& d) {
    auto params = d.autoencoder.parameters();
    const auto clf = d.classifier.parameters();
    params.insert(params.end(), clf.begin(), clf.end());
    return params;
}

}  // namespace

void save_detector(const Detector& detector, const std::string& path) {
    ad::save_checkpoint(path, all_parameters(detector));
    KeyValueFile meta;
    meta.set("variant", to_string(detector.config.kind));
    detector.config.write(meta, "detector.");
    meta.set("q", static_cast<long long>(detector.autoencoder.q()));
    meta.set("gamma", detector.classifier.gamma());
    meta.set("ae_epochs_run", static_cast<long long>(detector.ae_history.size()));
    meta.set("classifier_epochs_run", static_cast<long long>(detector.classifier_history.size()));
    meta.save(path + ".meta");
}

Detector load_detector(const std::string& path) {
    const auto meta = KeyValueFile::load(path + ".meta");
    Detector d;
    d.config = VariantConfig::defaults(parse_variant_kind(meta.get("variant")));
    std::set<std::string> used;
    d.config.read(meta, "detector.", used);
    const auto q = meta.get_int("q");
    if (q <= 0) throw ParseError(meta.source(), 0, "q must be positive");
    std::mt19937_64 rng(0);
    d.autoencoder = AutoencoderNet(static_cast<std::size_t>(q), d.config, rng);
    d.classifier = transfer_weights(d.autoencoder, d.config);
    d.classifier.set_gamma(meta.get_double("gamma"));
    ad::assign_parameters(all_parameters(d), ad::load_checkpoint(path));
    return d;
}

}  // namespace jamdet::detect
