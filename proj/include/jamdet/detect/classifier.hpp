#pragma once

#include "jamdet/detect/autoencoder.hpp"

#include <string>
#include <utility>
#include <vector>

namespace jamdet::detect {

// Transferred encoder (optional) -> dense(hidden) + ReLU + dropout ->
// dense(1) + sigmoid.
class ClassifierModel {
public:
    ClassifierModel() = default;

    // x [B, Q] -> scores [B, 1] in [0, 1].
    ad::Tensor forward(const ad::Tensor& x, bool train, std::uint64_t dropout_seed) const;
    ad::ParameterList parameters() const;
    ad::ParameterList encoder_parameters() const;
    ad::ParameterList head_parameters() const;

    const std::vector<ad::Conv1d>& encoder() const { return encoder_; }
    std::size_t q() const { return q_; }
    ClassifierInput input() const { return input_; }
    double gamma() const { return gamma_; }
    void set_gamma(double gamma) { gamma_ = gamma; }

    friend ClassifierModel transfer_weights(const AutoencoderNet& ae, const VariantConfig& config);
    friend ClassifierModel make_classifier(std::size_t q, const VariantConfig& config,
                                           const std::vector<ad::Conv1d>* encoder);

private:
    std::size_t q_ = 0;
    double dropout_ = 0.0;
    double gamma_ = 0.5;
    ClassifierInput input_ = ClassifierInput::Raw;
    std::vector<ad::Conv1d> encoder_;  // empty: head sees the input directly
    ad::Dense hidden_;
    ad::Dense output_;
};

// Deep copy of every encoder layer plus a freshly seeded head. ReconError
// variants with error_through_encoder=false get no encoder.
ClassifierModel transfer_weights(const AutoencoderNet& ae, const VariantConfig& config);
// Classifier with the given encoder layers copied (nullptr: none).
ClassifierModel make_classifier(std::size_t q, const VariantConfig& config, const std::vector<ad::Conv1d>* encoder);

// Rows the classifier consumes for `ds`: raw features or reconstruction
// errors, labels and flags carried over.
data::Dataset classifier_inputs(const AutoencoderNet& ae, ClassifierInput input, const data::Dataset& ds);

struct TrainedClassifier {
    ClassifierModel model;
    std::vector<EpochLoss> history;  // train and validation BCE per epoch
    std::size_t train_rows = 0;
    std::size_t validation_rows = 0;
};

// BCE fine-tuning on `inputs` (already passed through classifier_inputs),
// holding out a stratified validation_fraction. Encoder layers train unless
// freeze_encoder.
TrainedClassifier train_classifier(ClassifierModel model, const VariantConfig& config, const data::Dataset& inputs);

struct Decision {
    double score = 0.0;
    int label = 0;
};

// label = 1 iff score >= gamma.
inline int threshold(double score, double gamma) { return score >= gamma ? 1 : 0; }
// Dropout off; scores for prepared rows.
std::vector<double> scores(const ClassifierModel& model, const std::vector<std::vector<double>>& rows);
Decision classify(const ClassifierModel& model, const std::vector<double>& x, double gamma);
inline Decision classify(const ClassifierModel& model, const std::vector<double>& x) {
    return classify(model, x, model.gamma());
}

// The trained pipeline of one variant.
struct Detector {
    VariantConfig config;
    AutoencoderNet autoencoder;
    ClassifierModel classifier;
    std::vector<EpochLoss> ae_history;
    std::vector<EpochLoss> classifier_history;

    // Labels for raw normalized feature rows at the configured gamma.
    std::vector<int> predict(const std::vector<std::vector<double>>& rows) const;
    std::vector<double> predict_scores(const std::vector<std::vector<double>>& rows) const;
};

// train_autoencoder -> transfer_weights -> train_classifier.
Detector train_detector(const VariantConfig& config, const data::Dataset& train);

// stage,epoch,train_loss,validation_loss; autoencoder rows leave validation empty.
std::string loss_history_csv(const Detector& detector);
void write_loss_history(const std::string& path, const Detector& detector);

// Parameters of both networks in `path`; variant config, q, and gamma in
// `path + ".meta"`.
void save_detector(const Detector& detector, const std::string& path);
Detector load_detector(const std::string& path);

}  // namespace jamdet::detect
