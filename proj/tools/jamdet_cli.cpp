#include "CLI11.hpp"

#include "jamdet/data/csv.hpp"
#include "jamdet/data/profiles.hpp"
#include "jamdet/detect/classifier.hpp"
#include "jamdet/error.hpp"
#include "jamdet/eval/experiment.hpp"
#include "jamdet/gan/cwgan.hpp"
#include "jamdet/phy/iq_io.hpp"
#include "jamdet/phy/sync.hpp"
#include "jamdet/seed.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

using namespace jamdet;

namespace {

constexpr const char* kOutputEnv = "JAMDET_OUTPUT_DIR";

// Thrown for bad flag values found after CLI11 parsing; exits like a parse error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string default_output_dir() {
    const char* env = std::getenv(kOutputEnv);
    return env && *env ? env : ".";
}

struct Common {
    std::string out_dir = default_output_dir();

    // `path` if given, else `name` inside the output directory.
    std::string output(const std::string& path, const std::string& name) const {
        if (!path.empty()) return path;
        std::filesystem::create_directories(out_dir);
        return (std::filesystem::path(out_dir) / name).string();
    }
};

void add_ofdm_flags(CLI::App* cmd, phy::OfdmParams& p) {
    cmd->add_option("--fft-size", p.fft_size, "FFT size N")->capture_default_str();
    cmd->add_option("--cp-len", p.cp_len, "cyclic prefix length")->capture_default_str();
    cmd->add_option("--num-symbols", p.num_symbols, "OFDM symbols per frame")->capture_default_str();
    cmd->add_option("--ssb-symbol", p.ssb_symbol_index, "first SSB symbol")->capture_default_str();
    cmd->add_option("--ssb-symbols", p.ssb_num_symbols, "SSB symbols")->capture_default_str();
    cmd->add_option("--ssb-subcarriers", p.ssb_num_subcarriers, "SSB subcarriers")->capture_default_str();
    cmd->add_option("--sample-rate", p.sample_rate_hz, "sample rate in Hz")->capture_default_str();
}

// --config file plus --set key=value overrides, later entries winning.
KeyValueFile settings(const std::string& config_path, const std::vector<std::string>& sets) {
    KeyValueFile kv = config_path.empty() ? KeyValueFile() : KeyValueFile::load(config_path);
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
        kv.set(s.substr(0, eq), s.substr(eq + 1));
    }
    return kv;
}

void reject_unused(const KeyValueFile& kv, const std::set<std::string>& used) {
    for (const auto& [key, value] : kv.entries())
        if (!used.count(key)) throw UsageError("unknown config key '" + key + "'");
}

std::vector<std::vector<double>> feature_rows(const data::Dataset& ds) {
    std::vector<std::vector<double>> rows;
    for (const auto& o : ds.observations) rows.push_back(o.features);
    return rows;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << text;
    if (!out) throw IoError(path, "write failed");
}

std::string metric_line(const eval::Confusion& c, const eval::MetricRow& m) {
    std::ostringstream s;
    s << "tp=" << c.tp << " fp=" << c.fp << " tn=" << c.tn << " fn=" << c.fn << " precision=" << m.precision
      << " recall=" << m.recall << " f1=" << m.f1 << " accuracy=" << m.accuracy << " far=" << m.far
      << " mdr=" << m.mdr;
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SSB jamming-detection workbench: synthesis, sync, datasets, CWGAN-GP, detectors"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--out-dir", common.out_dir,
                   std::string("directory for default output paths (env ") + kOutputEnv + ")")
        ->capture_default_str();

    // synth
    phy::OfdmParams synth_p;
    int synth_nid2 = 0;
    std::uint64_t synth_seed = 0;
    std::size_t synth_lead = 512;
    double synth_cfo = 0.0;
    std::optional<double> synth_snr;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "write a preamble + CP-OFDM burst as I/Q CSV");
    add_ofdm_flags(synth, synth_p);
    synth->add_option("--nid2", synth_nid2, "PSS sequence index 0..2")->capture_default_str();
    synth->add_option("--seed", synth_seed, "payload and noise seed")->capture_default_str();
    synth->add_option("--lead-in", synth_lead, "zero samples before the preamble")->capture_default_str();
    synth->add_option("--cfo", synth_cfo, "carrier frequency offset in Hz")->capture_default_str();
    synth->add_option("--snr", synth_snr, "add white noise at this SNR in dB");
    synth->add_option("-o,--output", synth_out, "I/Q CSV path (default <out-dir>/burst.csv)");

    // sync
    phy::OfdmParams sync_p;
    int sync_nid2 = 0;
    double sync_span = 3000.0, sync_step = 500.0;
    std::string sync_in, sync_curve;
    auto* sync = app.add_subcommand("sync", "estimate CFO and timing of an I/Q CSV");
    add_ofdm_flags(sync, sync_p);
    sync->add_option("-i,--input", sync_in, "I/Q CSV")->required();
    sync->add_option("--nid2", sync_nid2, "PSS sequence index 0..2")->capture_default_str();
    sync->add_option("--cfo-span", sync_span, "CFO search span in Hz")->capture_default_str();
    sync->add_option("--cfo-step", sync_step, "CFO grid step in Hz")->capture_default_str();
    sync->add_option("--curve", sync_curve, "timing metric CSV (default <out-dir>/timing_metric.csv)");

    // build
    int build_profile = 1;
    std::uint64_t build_seed = 0;
    data::BuildOptions build_opts;
    std::string build_out;
    bool build_normalize = false;
    auto* build = app.add_subcommand("build", "materialize a built-in dataset profile as CSV");
    add_ofdm_flags(build, build_opts.ofdm);
    build->add_option("--profile", build_profile, "profile id 1..12")->capture_default_str();
    build->add_option("--seed", build_seed, "dataset seed")->capture_default_str();
    build->add_option("--snr-min", build_opts.snr_min_db, "lowest jamming SNR in dB")->capture_default_str();
    build->add_option("--snr-max", build_opts.snr_max_db, "highest jamming SNR in dB")->capture_default_str();
    build->add_flag("--normalize", build_normalize, "apply per-feature min-max");
    build->add_option("-o,--output", build_out, "dataset CSV (default <out-dir>/profile_<id>.csv)");

    // augment
    std::string aug_in, aug_out, aug_loss, aug_model, aug_config;
    std::vector<std::string> aug_set;
    std::optional<std::uint64_t> aug_seed;
    auto* augment = app.add_subcommand("augment", "train CWGAN-GP and balance a dataset");
    augment->add_option("-i,--input", aug_in, "dataset CSV")->required();
    augment->add_option("--config", aug_config, "key=value file with gan.* keys");
    augment->add_option("--set", aug_set, "override, e.g. gan.epochs=5");
    augment->add_option("--seed", aug_seed, "GAN and augmentation seed (overrides gan.seed)");
    augment->add_option("-o,--output", aug_out, "balanced CSV (default <out-dir>/augmented.csv)");
    augment->add_option("--loss", aug_loss, "loss history CSV (default <out-dir>/gan_loss.csv)");
    augment->add_option("--model", aug_model, "also save the trained CWGAN-GP here");

    // train
    std::string train_in, train_variant = "cae", train_model, train_loss, train_test, train_config;
    std::vector<std::string> train_set;
    std::optional<std::uint64_t> train_seed;
    double train_fraction = 0.8;
    auto* train = app.add_subcommand("train", "train one detector variant");
    train->add_option("-i,--input", train_in, "normalized (augmented) dataset CSV")->required();
    train->add_option("--variant", train_variant, "cae, cdae or csae")
        ->check(CLI::IsMember({"cae", "cdae", "csae"}))
        ->capture_default_str();
    train->add_option("--config", train_config, "key=value file with <variant>.* keys");
    train->add_option("--set", train_set, "override, e.g. cae.learning_rate=1e-3");
    train->add_option("--seed", train_seed, "detector seed (overrides <variant>.seed)");
    train->add_option("--train-fraction", train_fraction, "share used for training; the rest is written as test set")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    train->add_option("--model", train_model, "checkpoint (default <out-dir>/<variant>.ckpt)");
    train->add_option("--loss", train_loss, "loss history CSV (default <out-dir>/<variant>_loss.csv)");
    train->add_option("--test-output", train_test, "held-out CSV (default <out-dir>/test.csv)");

    // evaluate
    std::string eval_model, eval_in, eval_out;
    std::optional<double> eval_gamma;
    auto* evaluate = app.add_subcommand("evaluate", "metrics of a detector checkpoint on a labelled CSV");
    evaluate->add_option("--model", eval_model, "detector checkpoint")->required();
    evaluate->add_option("-i,--input", eval_in, "normalized labelled CSV")->required();
    evaluate->add_option("--gamma", eval_gamma, "decision threshold (default: the checkpoint's)");
    evaluate->add_option("-o,--output", eval_out, "report CSV with one row");

    // report
    std::string report_config;
    std::optional<std::size_t> report_jobs;
    auto* report = app.add_subcommand("report", "run the full experiment from a config file");
    report->add_option("--config", report_config, "experiment key=value file")->required();
    report->add_option("--jobs", report_jobs, "parallel experiment cells (overrides jobs)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth) {
            synth_p.validate();
            if (synth_nid2 < 0 || synth_nid2 > 2) throw UsageError("--nid2 must be 0, 1 or 2");
            auto burst = phy::synth_burst(synth_p, phy::gen_pss(synth_nid2), derive_seed(synth_seed, Stage::Synth, 2),
                                          synth_lead);
            phy::IQBuffer buf = phy::apply_cfo(burst.buffer, synth_cfo);
            if (synth_snr) buf = phy::add_noise(buf, std::pow(10.0, -*synth_snr / 10.0),
                                                derive_seed(synth_seed, Stage::Synth, 3));
            const auto path = common.output(synth_out, "burst.csv");
            phy::write_iq(path, buf, &synth_p);
            std::cout << "samples=" << buf.size() << " t_off=" << burst.timing_peak
                      << " frame_start=" << burst.frame_start << " cfo_hz=" << synth_cfo << " output=" << path
                      << '\n';
        } else if (*sync) {
            const auto file = phy::read_iq(sync_in);
            if (file.fft_size && sync->count("--fft-size") == 0) sync_p.fft_size = *file.fft_size;
            if (file.cp_len && sync->count("--cp-len") == 0) sync_p.cp_len = *file.cp_len;
            if (sync->count("--sample-rate") == 0) sync_p.sample_rate_hz = file.buffer.sample_rate_hz;
            sync_p.validate();
            if (sync_nid2 < 0 || sync_nid2 > 2) throw UsageError("--nid2 must be 0, 1 or 2");
            const auto r = phy::locate_frame(file.buffer, sync_p, phy::gen_pss(sync_nid2),
                                             phy::cfo_grid(sync_span, sync_step));
            const auto curve_path = common.output(sync_curve, "timing_metric.csv");
            std::ostringstream curve;
            curve << "t,metric\n";
            for (std::size_t t = 0; t < r.metric_curve.size(); ++t)
                curve << t << ',' << format_double(r.metric_curve[t]) << '\n';
            write_text(curve_path, curve.str());
            std::cout << "t_off=" << r.t_off << " frame_start=" << r.frame_start << " cfo_hz=" << r.cfo_hz
                      << " curve=" << curve_path << '\n';
        } else if (*build) {
            auto ds = data::build_profile(data::profile_by_id(build_profile), build_opts, build_seed);
            if (build_normalize) ds = data::normalize(ds);
            const auto path = common.output(build_out, "profile_" + std::to_string(build_profile) + ".csv");
            data::save_csv(ds, path);
            std::cout << "rows=" << ds.size() << " jammed=" << ds.count(data::kJammed)
                      << " non_jammed=" << ds.count(data::kNonJammed) << " q=" << ds.feature_dim()
                      << " output=" << path << '\n';
        } else if (*augment) {
            const auto kv = settings(aug_config, aug_set);
            gan::GanConfig cfg;
            std::set<std::string> used;
            cfg.read(kv, "gan.", used);
            reject_unused(kv, used);
            if (aug_seed) cfg.seed = *aug_seed;
            auto ds = data::load_csv(aug_in);
            if (!ds.normalized) ds = data::normalize(ds);
            auto model = gan::train(cfg, ds);
            const auto out = gan::augment_to_balance(model.generator, ds, cfg.per_class, cfg.round_size,
                                                     derive_seed(cfg.seed, Stage::Augment, 0));
            const auto path = common.output(aug_out, "augmented.csv");
            const auto loss = common.output(aug_loss, "gan_loss.csv");
            data::save_csv(out, path);
            gan::write_loss_history(loss, model.history);
            if (!aug_model.empty()) gan::save_model(model, aug_model);
            std::cout << "rows=" << out.size() << " jammed=" << out.count(data::kJammed)
                      << " non_jammed=" << out.count(data::kNonJammed) << " synthetic=" << out.size() - out.real_count()
                      << " output=" << path << " loss=" << loss << '\n';
        } else if (*train) {
            const auto kv = settings(train_config, train_set);
            auto cfg = detect::VariantConfig::defaults(detect::parse_variant_kind(train_variant));
            std::set<std::string> used;
            cfg.read(kv, train_variant + ".", used);
            reject_unused(kv, used);
            if (train_seed) cfg.seed = *train_seed;
            const auto ds = data::load_csv(train_in);
            if (!ds.normalized) throw DomainError(train_in + ": detector training needs a normalized dataset");
            data::Dataset fit = ds;
            if (train_fraction < 1.0) {
                auto [tr, te] = data::split_train_test(ds, train_fraction, derive_seed(cfg.seed, Stage::Split, 0));
                fit = std::move(tr);
                data::save_csv(te, common.output(train_test, "test.csv"));
            }
            const auto det = detect::train_detector(cfg, fit);
            const auto model = common.output(train_model, train_variant + ".ckpt");
            const auto loss = common.output(train_loss, train_variant + "_loss.csv");
            detect::save_detector(det, model);
            detect::write_loss_history(loss, det);
            std::cout << "variant=" << train_variant << " rows=" << fit.size() << " model=" << model
                      << " loss=" << loss << '\n';
        } else if (*evaluate) {
            auto det = detect::load_detector(eval_model);
            if (eval_gamma) det.classifier.set_gamma(*eval_gamma);
            const auto ds = data::load_csv(eval_in);
            if (!ds.normalized) throw DomainError(eval_in + ": evaluation needs a normalized dataset");
            std::vector<int> labels;
            for (const auto& o : ds.observations) labels.push_back(o.label);
            const auto c = eval::confusion(labels, det.predict(feature_rows(ds)));
            const auto m = eval::metrics(c);
            std::cout << metric_line(c, m) << '\n';
            if (!eval_out.empty()) {
                eval::Report r;
                r.cells.push_back({ds.profile.id, ds.profile.name, det.config.kind, true, "", c, m});
                r.metadata["model"] = eval_model;
                r.metadata["input"] = eval_in;
                eval::save_report_csv(eval_out, r);
            }
        } else if (*report) {
            auto cfg = eval::ExperimentConfig::load(report_config);
            if (report_jobs) cfg.jobs = *report_jobs;
            if (cfg.output_dir.empty()) cfg.output_dir = common.out_dir;
            const auto r = eval::run_experiment(cfg, [](const std::string& m) { std::cerr << m << '\n'; });
            std::cout << eval::report_text(r);
            if (r.failures() == r.cells.size()) {
                std::cerr << "error: every experiment cell failed\n";
                return 1;
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
