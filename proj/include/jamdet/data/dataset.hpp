#pragma once

#include "jamdet/phy/ofdm.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace jamdet::data {

inline constexpr int kNonJammed = 0;
inline constexpr int kJammed = 1;

struct SSBObservation {
    std::vector<double> features;  // |I/Q| per SSB resource element
    int label = kNonJammed;
    bool synthetic = false;        // produced by the generator, not measured

    bool operator==(const SSBObservation&) const = default;
};

struct DatasetProfile {
    int id = 0;  // 1..12 for the built-in profiles, 0 for ad-hoc data
    std::string name;
    std::size_t total = 0;
    std::size_t jammed = 0;
    std::size_t non_jammed = 0;

    // jammed + non_jammed == total, both >= 1.
    void validate() const;
    bool operator==(const DatasetProfile&) const = default;
};

// Per-feature min/max of the data a Dataset was normalized with.
struct NormStats {
    std::vector<double> min;
    std::vector<double> max;

    bool empty() const { return min.empty(); }
    bool operator==(const NormStats&) const = default;
};

struct Dataset {
    std::vector<SSBObservation> observations;
    DatasetProfile profile;
    bool normalized = false;
    NormStats norm_stats;
    // Provenance, written to the manifest.
    std::uint64_t seed = 0;
    double snr_min_db = 0.0;
    double snr_max_db = 0.0;

    std::size_t size() const { return observations.size(); }
    std::size_t feature_dim() const { return observations.empty() ? 0 : observations.front().features.size(); }
    std::size_t count(int label) const;
    std::size_t real_count() const;
    // Equal row widths, labels in {0,1}, finite non-negative features,
    // [0,1] features when normalized. Throws DomainError.
    void validate() const;
    // Rows `indices`, in the order given, carrying this dataset's metadata.
    Dataset subset(const std::vector<std::size_t>& indices) const;

    bool operator==(const Dataset&) const = default;
};

std::vector<double> featurize(const std::vector<phy::cplx>& ssb);

// Adds circular complex Gaussian noise with per-sample variance
// mean|x|^2 / 10^(snr_db/10).
std::vector<phy::cplx> inject_awgn(const std::vector<phy::cplx>& x, double snr_db, std::uint64_t seed);

struct BuildOptions {
    phy::OfdmParams ofdm;
    double snr_min_db = 0.0;
    double snr_max_db = 15.0;
};

// `total` synthesized frames, SSB pulled from each by extract_ssb at the
// true offset. The first `jammed` are jammed through inject_awgn with an SNR
// drawn uniformly from the range, then rows are shuffled.
Dataset build_profile(const DatasetProfile& profile, const BuildOptions& options, std::uint64_t seed);

// Per-feature min-max over this dataset; constant features map to 0.
Dataset normalize(const Dataset& ds);
// Applies fixed stats to raw data, clamping into [0,1].
Dataset normalize_with(const Dataset& ds, const NormStats& stats);
std::vector<double> denormalize(const std::vector<double>& row, const NormStats& stats);

// Stratified split. Per class, test gets round(n * (1 - train_frac)) rows,
// capped so train keeps at least one. Rows keep their original relative
// order within each part.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double train_frac, std::uint64_t seed);

}  // namespace jamdet::data
