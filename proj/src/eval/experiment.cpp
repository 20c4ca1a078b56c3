#include "jamdet/eval/experiment.hpp"

#include "jamdet/data/csv.hpp"
#include "jamdet/data/profiles.hpp"
#include "jamdet/detect/classifier.hpp"
#include "jamdet/error.hpp"
#include "jamdet/seed.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

namespace jamdet::eval {

namespace {

std::size_t read_size(const KeyValueFile& kv, const std::string& key, std::size_t fallback) {
    const long long v = kv.get_int_or(key, static_cast<long long>(fallback));
    if (v < 0) throw ParseError(kv.source(), 0, "key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::size_t variant_index(detect::VariantKind k) { return static_cast<std::size_t>(k); }

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    for (auto& t : pool) t.join();
}

struct PreparedProfile {
    data::DatasetProfile profile;
    std::optional<data::Dataset> train;
    std::optional<data::Dataset> test;
    std::string error;
};

std::filesystem::path profile_dir(const ExperimentConfig& c, int id) {
    return std::filesystem::path(c.output_dir) / ("profile_" + std::to_string(id));
}

}  // namespace

void read_ofdm(const KeyValueFile& kv, const std::string& prefix, phy::OfdmParams& p, std::set<std::string>& used) {
    auto key = [&](const char* k) {
        used.insert(prefix + k);
        return prefix + k;
    };
    p.fft_size = read_size(kv, key("fft_size"), p.fft_size);
    p.cp_len = read_size(kv, key("cp_len"), p.cp_len);
    p.num_symbols = read_size(kv, key("num_symbols"), p.num_symbols);
    p.ssb_symbol_index = read_size(kv, key("ssb_symbol_index"), p.ssb_symbol_index);
    p.ssb_num_symbols = read_size(kv, key("ssb_num_symbols"), p.ssb_num_symbols);
    p.ssb_num_subcarriers = read_size(kv, key("ssb_num_subcarriers"), p.ssb_num_subcarriers);
    p.sample_rate_hz = kv.get_double_or(key("sample_rate_hz"), p.sample_rate_hz);
    p.validate();
}

void write_ofdm(KeyValueFile& kv, const std::string& prefix, const phy::OfdmParams& p) {
    kv.set(prefix + "fft_size", static_cast<long long>(p.fft_size));
    kv.set(prefix + "cp_len", static_cast<long long>(p.cp_len));
    kv.set(prefix + "num_symbols", static_cast<long long>(p.num_symbols));
    kv.set(prefix + "ssb_symbol_index", static_cast<long long>(p.ssb_symbol_index));
    kv.set(prefix + "ssb_num_symbols", static_cast<long long>(p.ssb_num_symbols));
    kv.set(prefix + "ssb_num_subcarriers", static_cast<long long>(p.ssb_num_subcarriers));
    kv.set(prefix + "sample_rate_hz", p.sample_rate_hz);
}

void ExperimentConfig::validate() const {
    if (profiles.empty()) throw DomainError("experiment needs at least one profile");
    for (int id : profiles) data::profile_by_id(id);
    if (variants.empty()) throw DomainError("experiment needs at least one variant");
    for (auto k : variants)
        if (!detectors.count(k)) throw DomainError("no configuration for variant " + detect::to_string(k));
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw DomainError("train_fraction must lie in (0, 1)");
    if (!(build.snr_min_db <= build.snr_max_db)) throw DomainError("snr_min_db must not exceed snr_max_db");
    if (jobs < 1) throw DomainError("jobs must be at least 1");
    build.ofdm.validate();
    gan.validate();
    for (const auto& [k, v] : detectors) v.validate();
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueFile& kv) {
    ExperimentConfig c;
    std::set<std::string> used{"seed", "profiles", "variants", "jobs", "output_dir", "train_fraction",
                               "snr_min_db", "snr_max_db"};
    for (const auto& [key, value] : kv.entries())
        if (key.ends_with(".seed"))
            throw ParseError(kv.source(), 0, "key '" + key + "': stage seeds derive from 'seed'");
    c.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 0));
    const auto ids = kv.get_int_list_or("profiles", {c.profiles.begin(), c.profiles.end()});
    c.profiles.assign(ids.begin(), ids.end());
    std::vector<std::string> names;
    for (auto k : c.variants) names.push_back(detect::to_string(k));
    c.variants.clear();
    for (const auto& name : kv.get_list_or("variants", names)) {
        try {
            c.variants.push_back(detect::parse_variant_kind(name));
        } catch (const DomainError& e) {
            throw ParseError(kv.source(), 0, std::string("key 'variants': ") + e.what());
        }
    }
    c.jobs = read_size(kv, "jobs", c.jobs);
    c.output_dir = kv.get_or("output_dir", c.output_dir);
    c.train_fraction = kv.get_double_or("train_fraction", c.train_fraction);
    c.build.snr_min_db = kv.get_double_or("snr_min_db", c.build.snr_min_db);
    c.build.snr_max_db = kv.get_double_or("snr_max_db", c.build.snr_max_db);
    read_ofdm(kv, "ofdm.", c.build.ofdm, used);
    c.gan.read(kv, "gan.", used);
    for (auto& [kind, cfg] : c.detectors) cfg.read(kv, detect::to_string(kind) + ".", used);
    for (const auto& [key, value] : kv.entries())
        if (!used.count(key)) throw ParseError(kv.source(), 0, "unknown key '" + key + "'");
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) { return from_kv(KeyValueFile::load(path)); }

KeyValueFile ExperimentConfig::to_kv() const {
    KeyValueFile kv;
    kv.set("seed", static_cast<long long>(seed));
    kv.set("profiles", join_ints(profiles));
    std::string names;
    for (auto k : variants) names += (names.empty() ? "" : ",") + detect::to_string(k);
    kv.set("variants", names);
    kv.set("jobs", static_cast<long long>(jobs));
    if (!output_dir.empty()) kv.set("output_dir", output_dir);
    kv.set("train_fraction", train_fraction);
    kv.set("snr_min_db", build.snr_min_db);
    kv.set("snr_max_db", build.snr_max_db);
    write_ofdm(kv, "ofdm.", build.ofdm);
    gan.write(kv, "gan.");
    for (const auto& [kind, cfg] : detectors) cfg.write(kv, detect::to_string(kind) + ".");
    // Stage seeds are derived, not configured.
    KeyValueFile out;
    for (const auto& [k, v] : kv.entries())
        if (!k.ends_with(".seed")) out.set(k, v);
    return out;
}

Report run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
    config.validate();
    std::mutex log_mutex;
    auto log = [&](const std::string& msg) {
        if (!progress) return;
        std::lock_guard lock(log_mutex);
        progress(msg);
    };
    const bool artifacts = !config.output_dir.empty();

    std::vector<PreparedProfile> prepared(config.profiles.size());
    parallel_for(prepared.size(), config.jobs, [&](std::size_t i) {
        const int id = config.profiles[i];
        auto& p = prepared[i];
        p.profile = data::profile_by_id(id);
        try {
            log("profile " + std::to_string(id) + ": build");
            const auto ds = data::normalize(
                data::build_profile(p.profile, config.build, derive_seed(config.seed, Stage::Build, id)));
            gan::GanConfig gc = config.gan;
            gc.seed = derive_seed(config.seed, Stage::Gan, id);
            log("profile " + std::to_string(id) + ": CWGAN-GP");
            auto model = gan::train(gc, ds);
            const auto balanced = gan::augment_to_balance(model.generator, ds, gc.per_class, gc.round_size,
                                                          derive_seed(config.seed, Stage::Augment, id));
            auto [train, test] =
                data::split_train_test(balanced, config.train_fraction, derive_seed(config.seed, Stage::Split, id));
            if (artifacts) {
                const auto dir = profile_dir(config, id);
                std::filesystem::create_directories(dir);
                gan::write_loss_history((dir / "gan_loss.csv").string(), model.history);
                data::save_csv(balanced, (dir / "augmented.csv").string());
            }
            p.train = std::move(train);
            p.test = std::move(test);
        } catch (const std::exception& e) {
            p.error = e.what();
            log("profile " + std::to_string(id) + ": failed: " + p.error);
        }
    });

    const std::size_t nv = config.variants.size();
    std::vector<CellResult> cells(prepared.size() * nv);
    parallel_for(cells.size(), config.jobs, [&](std::size_t i) {
        const auto& p = prepared[i / nv];
        const auto kind = config.variants[i % nv];
        auto& cell = cells[i];
        cell.profile_id = p.profile.id;
        cell.profile_name = p.profile.name;
        cell.variant = kind;
        if (!p.error.empty()) {
            cell.error = "dataset stage: " + p.error;
            return;
        }
        try {
            auto vc = config.detectors.at(kind);
            vc.seed = derive_seed(config.seed, Stage::Autoencoder, 4 * static_cast<std::uint64_t>(p.profile.id) +
                                                                       variant_index(kind));
            log("profile " + std::to_string(p.profile.id) + ": " + detect::to_string(kind));
            const auto det = detect::train_detector(vc, *p.train);
            std::vector<std::vector<double>> rows;
            std::vector<int> labels;
            for (const auto& o : p.test->observations) {
                rows.push_back(o.features);
                labels.push_back(o.label);
            }
            cell.confusion = confusion(labels, det.predict(rows));
            cell.metrics = metrics(cell.confusion);
            cell.ok = true;
            if (artifacts)
                detect::write_loss_history(
                    (profile_dir(config, p.profile.id) / (detect::to_string(kind) + "_loss.csv")).string(), det);
        } catch (const std::exception& e) {
            cell = CellResult{p.profile.id, p.profile.name, kind, false, e.what(), {}, {}};
            log("profile " + std::to_string(p.profile.id) + ": " + detect::to_string(kind) + " failed: " + e.what());
        }
    });

    Report report;
    report.cells = std::move(cells);
    sort_cells(report.cells);
    const auto flat = config.to_kv();
    for (const auto& [k, v] : flat.entries())
        if (k != "jobs" && k != "output_dir") report.metadata[k] = v;
    if (artifacts) {
        std::filesystem::create_directories(config.output_dir);
        save_report_csv((std::filesystem::path(config.output_dir) / "report.csv").string(), report);
        std::ofstream txt(std::filesystem::path(config.output_dir) / "report.txt", std::ios::binary);
        txt << report_text(report);
    }
    return report;
}

Report run_experiment(const std::string& config_path, const ProgressFn& progress) {
    return run_experiment(ExperimentConfig::load(config_path), progress);
}

}  // namespace jamdet::eval
