#pragma once

#include "jamdet/data/dataset.hpp"
#include "jamdet/detect/autoencoder.hpp"
#include "jamdet/eval/report.hpp"
#include "jamdet/gan/cwgan.hpp"
#include "jamdet/kv.hpp"

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace jamdet::eval {

// One run over profiles x variants. Stage seeds all derive from `seed`:
//   dataset    derive_seed(seed, Build, profile id)
//   CWGAN-GP   derive_seed(seed, Gan, profile id)
//   augment    derive_seed(seed, Augment, profile id)
//   80:20      derive_seed(seed, Split, profile id)
//   detector   derive_seed(seed, Autoencoder, 4 * profile id + variant index)
// so per-stage seed keys are rejected in config files.
struct ExperimentConfig {
    std::vector<int> profiles{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<detect::VariantKind> variants{detect::VariantKind::Cae, detect::VariantKind::Cdae,
                                              detect::VariantKind::Csae};
    std::uint64_t seed = 0;
    data::BuildOptions build;
    gan::GanConfig gan;
    std::map<detect::VariantKind, detect::VariantConfig> detectors{
        {detect::VariantKind::Cae, detect::VariantConfig::defaults(detect::VariantKind::Cae)},
        {detect::VariantKind::Cdae, detect::VariantConfig::defaults(detect::VariantKind::Cdae)},
        {detect::VariantKind::Csae, detect::VariantConfig::defaults(detect::VariantKind::Csae)}};
    double train_fraction = 0.8;
    std::size_t jobs = 1;
    std::string output_dir;  // empty: no artifacts written

    void validate() const;
    // Keys: seed, profiles, variants, jobs, output_dir, train_fraction,
    // snr_min_db, snr_max_db, ofdm.*, gan.*, cae.*, cdae.*, csae.*.
    // Unknown keys are a ParseError naming the key.
    static ExperimentConfig from_kv(const KeyValueFile& kv);
    static ExperimentConfig load(const std::string& path);
    KeyValueFile to_kv() const;
};

void read_ofdm(const KeyValueFile& kv, const std::string& prefix, phy::OfdmParams& params,
               std::set<std::string>& used);
void write_ofdm(KeyValueFile& kv, const std::string& prefix, const phy::OfdmParams& params);

using ProgressFn = std::function<void(const std::string&)>;

// build -> normalize -> CWGAN-GP on the full set -> augment -> split ->
// per variant: train detector -> evaluate on the test part. A stage error
// fails the affected cells only. Cells run on up to `jobs` threads; the
// report is identical for any job count.
Report run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});
Report run_experiment(const std::string& config_path, const ProgressFn& progress = {});

}  // namespace jamdet::eval
