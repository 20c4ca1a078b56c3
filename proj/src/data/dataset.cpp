#include "jamdet/data/dataset.hpp"

#include "jamdet/error.hpp"
#include "jamdet/phy/sync.hpp"
#include "jamdet/seed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace jamdet::data {

void DatasetProfile::validate() const {
    if (jammed < 1 || non_jammed < 1) throw DomainError("profile '" + name + "' needs at least one row per class");
    if (jammed + non_jammed != total)
        throw DomainError("profile '" + name + "': " + std::to_string(jammed) + " + " + std::to_string(non_jammed) +
                          " != " + std::to_string(total));
}

std::size_t Dataset::count(int label) const {
    return static_cast<std::size_t>(std::count_if(observations.begin(), observations.end(),
                                                  [label](const SSBObservation& o) { return o.label == label; }));
}

std::size_t Dataset::real_count() const {
    return static_cast<std::size_t>(std::count_if(observations.begin(), observations.end(),
                                                  [](const SSBObservation& o) { return !o.synthetic; }));
}

void Dataset::validate() const {
    const std::size_t q = feature_dim();
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        const std::string where = "row " + std::to_string(i);
        if (o.features.size() != q || q == 0)
            throw DomainError(where + " has " + std::to_string(o.features.size()) + " features, expected " +
                              std::to_string(q));
        if (o.label != kJammed && o.label != kNonJammed) throw DomainError(where + " label must be 0 or 1");
        for (double v : o.features) {
            if (!std::isfinite(v) || v < 0.0) throw DomainError(where + " has a negative or non-finite feature");
            if (normalized && v > 1.0) throw DomainError(where + " has a normalized feature above 1");
        }
    }
    if (normalized && (norm_stats.min.size() != q || norm_stats.max.size() != q))
        throw DomainError("normalization stats do not match feature width");
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out = *this;
    out.observations.clear();
    out.observations.reserve(indices.size());
    for (auto i : indices) out.observations.push_back(observations.at(i));
    return out;
}

std::vector<double> featurize(const std::vector<phy::cplx>& ssb) {
    if (ssb.empty()) throw DomainError("cannot featurize an empty SSB");
    std::vector<double> out(ssb.size());
    std::transform(ssb.begin(), ssb.end(), out.begin(), [](const phy::cplx& v) { return std::abs(v); });
    return out;
}

std::vector<phy::cplx> inject_awgn(const std::vector<phy::cplx>& x, double snr_db, std::uint64_t seed) {
    if (!std::isfinite(snr_db)) throw DomainError("SNR must be finite");
    if (x.empty()) throw DomainError("cannot jam an empty signal");
    double power = 0.0;
    for (const auto& v : x) power += std::norm(v);
    power /= static_cast<double>(x.size());
    if (!(power > 0.0)) throw DomainError("signal power is zero");

    const double noise_power = power / std::pow(10.0, snr_db / 10.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(noise_power / 2.0));
    std::vector<phy::cplx> out(x);
    for (auto& v : out) {
        const double re = normal(rng);
        const double im = normal(rng);
        v += phy::cplx(re, im);
    }
    return out;
}

// Index used for the shuffle seed, far from the per-row indices.
constexpr std::uint64_t kShuffleIndex = 1ull << 40;

Dataset build_profile(const DatasetProfile& profile, const BuildOptions& options, std::uint64_t seed) {
    profile.validate();
    options.ofdm.validate();
    if (!(options.snr_min_db <= options.snr_max_db) || !std::isfinite(options.snr_min_db) ||
        !std::isfinite(options.snr_max_db))
        throw DomainError("SNR range must be finite and ordered");

    const auto pss = phy::gen_pss(((profile.id - 1) % 3 + 3) % 3);
    Dataset ds;
    ds.profile = profile;
    ds.seed = seed;
    ds.snr_min_db = options.snr_min_db;
    ds.snr_max_db = options.snr_max_db;
    ds.observations.reserve(profile.total);
    const phy::SyncResult aligned;
    for (std::size_t i = 0; i < profile.total; ++i) {
        const auto frame = phy::synth_frame(options.ofdm, pss, derive_seed(seed, Stage::Build, i));
        auto ssb = phy::extract_ssb(frame, aligned, options.ofdm);
        SSBObservation obs;
        obs.label = i < profile.jammed ? kJammed : kNonJammed;
        if (obs.label == kJammed) {
            std::mt19937_64 rng(derive_seed(seed, Stage::Jam, i));
            std::uniform_real_distribution<double> snr(options.snr_min_db, options.snr_max_db);
            const double snr_db = options.snr_min_db == options.snr_max_db ? options.snr_min_db : snr(rng);
            ssb = inject_awgn(ssb, snr_db, rng());
        }
        obs.features = featurize(ssb);
        ds.observations.push_back(std::move(obs));
    }
    std::mt19937_64 rng(derive_seed(seed, Stage::Build, kShuffleIndex));
    std::shuffle(ds.observations.begin(), ds.observations.end(), rng);
    return ds;
}

namespace {

NormStats compute_stats(const Dataset& ds) {
    const std::size_t q = ds.feature_dim();
    NormStats s;
    s.min.assign(q, 0.0);
    s.max.assign(q, 0.0);
    for (std::size_t j = 0; j < q; ++j) {
        double lo = ds.observations.front().features[j], hi = lo;
        for (const auto& o : ds.observations) {
            lo = std::min(lo, o.features[j]);
            hi = std::max(hi, o.features[j]);
        }
        s.min[j] = lo;
        s.max[j] = hi;
    }
    return s;
}

}  // namespace

Dataset normalize_with(const Dataset& ds, const NormStats& stats) {
    if (ds.normalized) throw StateError("dataset is already normalized");
    ds.validate();
    const std::size_t q = ds.feature_dim();
    if (stats.min.size() != q || stats.max.size() != q)
        throw DomainError("normalization stats of width " + std::to_string(stats.min.size()) + " for " +
                          std::to_string(q) + " features");
    Dataset out = ds;
    for (auto& o : out.observations)
        for (std::size_t j = 0; j < q; ++j) {
            const double range = stats.max[j] - stats.min[j];
            const double v = range > 0.0 ? (o.features[j] - stats.min[j]) / range : 0.0;
            o.features[j] = std::clamp(v, 0.0, 1.0);
        }
    out.normalized = true;
    out.norm_stats = stats;
    return out;
}

Dataset normalize(const Dataset& ds) {
    if (ds.normalized) throw StateError("dataset is already normalized");
    if (ds.observations.empty()) throw DomainError("cannot normalize an empty dataset");
    return normalize_with(ds, compute_stats(ds));
}

std::vector<double> denormalize(const std::vector<double>& row, const NormStats& stats) {
    if (row.size() != stats.min.size()) throw DomainError("row width does not match normalization stats");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = stats.min[j] + row[j] * (stats.max[j] - stats.min[j]);
    return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double train_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw DomainError("train_frac must lie in (0, 1)");
    std::vector<std::size_t> train, test;
    for (int label : {kNonJammed, kJammed}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (ds.observations[i].label == label) idx.push_back(i);
        if (idx.empty()) continue;
        std::mt19937_64 rng(derive_seed(seed, Stage::Split, static_cast<std::uint64_t>(label)));
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n = idx.size();
        auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - train_frac)));
        n_test = std::min(n_test, n - 1);
        test.insert(test.end(), idx.begin(), idx.begin() + static_cast<long>(n_test));
        train.insert(train.end(), idx.begin() + static_cast<long>(n_test), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {ds.subset(train), ds.subset(test)};
}

}  // namespace jamdet::data
