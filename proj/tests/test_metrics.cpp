#include "doctest.h"

#include "jamdet/error.hpp"
#include "jamdet/eval/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

using namespace jamdet;
using namespace jamdet::eval;
using detect::VariantKind;

namespace {

std::vector<MetricRow> column_rows(const std::vector<double>& p, const std::vector<double>& r,
                                   const std::vector<double>& f) {
    std::vector<MetricRow> rows(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        rows[i].precision = p[i] / 100.0;
        rows[i].recall = r[i] / 100.0;
        rows[i].f1 = f[i] / 100.0;
    }
    return rows;
}

// Per-dataset precision / recall / F1 (%) of the published per-dataset table.
const std::vector<double> kCaeP{100, 97, 97, 97, 100, 92, 100, 99, 92, 98, 100, 96};
const std::vector<double> kCaeR{82, 92, 81, 95, 99, 95, 99, 92, 68, 97, 99, 97};
const std::vector<double> kCaeF{90, 95, 88, 96, 99, 94, 99, 95, 78, 98, 100, 97};
const std::vector<double> kCdaeP{83, 64, 85, 91, 84, 98, 94, 97, 97, 99, 92, 92};
const std::vector<double> kCdaeR{98, 88, 96, 97, 98, 82, 90, 84, 95, 86, 91, 96};
const std::vector<double> kCdaeF{90, 74, 90, 94, 91, 90, 92, 90, 96, 92, 91, 94};
const std::vector<double> kCsaeP{97, 88, 93, 93, 94, 87, 98, 90, 95, 51, 98, 95};
const std::vector<double> kCsaeR{95, 98, 92, 89, 97, 88, 98, 94, 97, 65, 95, 93};
const std::vector<double> kCsaeF{96, 93, 92, 91, 96, 87, 98, 92, 96, 57, 96, 94};

ExperimentConfig tiny_experiment() {
    ExperimentConfig c;
    c.profiles = {11, 2};
    c.variants = {VariantKind::Csae, VariantKind::Cae};
    c.seed = 5;
    c.build.ofdm.fft_size = 256;
    c.build.ofdm.cp_len = 18;
    c.build.ofdm.num_symbols = 2;
    c.build.ofdm.ssb_symbol_index = 0;
    c.build.ofdm.ssb_num_symbols = 1;
    c.build.ofdm.ssb_num_subcarriers = 128;
    c.build.ofdm.sample_rate_hz = 3.84e6;
    c.build.snr_min_db = 5;
    c.gan.critic_channels = {2, 4};
    c.gan.generator_channels = {4};
    c.gan.latent_dim = 8;
    c.gan.epochs = 1;
    c.gan.n_critic = 1;
    c.gan.per_class = 600;
    c.gan.round_size = 100;
    for (auto& [k, v] : c.detectors) {
        v.encoder_channels = {4, 4, 2};
        v.fcn_hidden = 8;
        v.ae_epochs = 1;
        v.classifier_epochs = 2;
        v.learning_rate = 1e-3;
    }
    return c;
}

}  // namespace

TEST_CASE("confusion counts") {
    CHECK(confusion({1, 0}, {1, 0}) == Confusion{1, 0, 1, 0});
    CHECK(confusion({1}, {0}) == Confusion{0, 0, 0, 1});
    CHECK(confusion({0}, {1}) == Confusion{0, 1, 0, 0});
    CHECK(confusion({}, {}).total() == 0);
    CHECK_THROWS_AS(confusion({1, 0}, {1}), DomainError);
    CHECK_THROWS_AS(confusion({2}, {1}), DomainError);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> y(1 + rng() % 40), p(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = static_cast<int>(rng() % 2);
            p[i] = static_cast<int>(rng() % 2);
        }
        CHECK(confusion(y, p).total() == y.size());
    }
}

TEST_CASE("metric definitions") {
    const auto sym = metrics({1, 1, 1, 1});
    for (double v : {sym.precision, sym.recall, sym.f1, sym.accuracy, sym.far, sym.mdr}) CHECK(v == 0.5);
    CHECK(!sym.undefined.any());

    const auto perfect = metrics({7, 0, 5, 0});
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.far == 0.0);
    CHECK(perfect.mdr == 0.0);

    // Recall 68% means 32% of jammed signals are missed.
    const auto nine = metrics({68, 6, 90, 32});
    CHECK(nine.recall == 0.68);
    CHECK(nine.mdr == 0.32);
    CHECK(metrics({10, 64, 936, 5}).far == 0.064);

    const auto no_positive_pred = metrics({0, 0, 4, 3});
    CHECK(no_positive_pred.undefined.precision);
    CHECK(no_positive_pred.undefined.f1);
    CHECK(!no_positive_pred.undefined.recall);
    CHECK(no_positive_pred.precision == 0.0);
    const auto no_negatives = metrics({3, 0, 0, 1});
    CHECK(no_negatives.undefined.far);
    CHECK(no_negatives.far == 0.0);
    CHECK_THROWS_AS(metrics({}), DomainError);

    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 500; ++trial) {
        const Confusion c{rng() % 20, rng() % 20, rng() % 20, rng() % 20};
        if (c.total() == 0) continue;
        const auto m = metrics(c);
        if (c.tp + c.fn > 0) CHECK(m.mdr == doctest::Approx(1.0 - m.recall).epsilon(1e-15));
        if (c.fp + c.tn > 0) {
            const double specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
            CHECK(m.far + specificity == doctest::Approx(1.0).epsilon(1e-15));
        }
        if (!m.undefined.f1) CHECK(m.f1 == doctest::Approx(2.0 / (1.0 / m.precision + 1.0 / m.recall)));
        for (double v : {m.precision, m.recall, m.f1, m.accuracy, m.far, m.mdr}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("aggregate reproduces the published averages") {
    struct Case {
        std::vector<MetricRow> rows;
        double p, r, f;
    };
    const Case cases[] = {{column_rows(kCaeP, kCaeR, kCaeF), 97.33, 91.33, 94.08},
                          {column_rows(kCdaeP, kCdaeR, kCdaeF), 89.67, 91.75, 90.33},
                          {column_rows(kCsaeP, kCsaeR, kCsaeF), 89.92, 91.75, 90.67}};
    for (const auto& c : cases) {
        const auto m = aggregate(c.rows);
        CHECK(std::abs(100.0 * m.precision - c.p) <= 0.01);
        CHECK(std::abs(100.0 * m.recall - c.r) <= 0.01);
        CHECK(std::abs(100.0 * m.f1 - c.f) <= 0.01);

        auto shuffled = c.rows;
        std::mt19937_64 rng(1);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto s = aggregate(shuffled);
        CHECK(s.precision == doctest::Approx(m.precision).epsilon(1e-15));
        CHECK(s.f1 == doctest::Approx(m.f1).epsilon(1e-15));
    }
    CHECK_THROWS_AS(aggregate({}), DomainError);
    MetricRow flagged;
    flagged.undefined.far = true;
    CHECK(aggregate({MetricRow{}, flagged}).undefined.far);
}

TEST_CASE("report serialization and rendering") {
    Report r;
    r.metadata = {{"seed", "7"}, {"note", "a=b, c"}};
    auto rows = column_rows(kCaeP, kCaeR, kCaeF);
    for (auto& row : rows) row.accuracy = 1.0 / 3.0;
    for (int id = 12; id >= 1; --id) {
        CellResult c;
        c.profile_id = id;
        c.profile_name = id == 10 ? "Park, \"Shirley\"" : "p" + std::to_string(id);
        c.variant = VariantKind::Cae;
        c.ok = true;
        c.confusion = {static_cast<std::size_t>(id), 1, 2, 3};
        c.metrics = rows[static_cast<std::size_t>(id - 1)];
        r.cells.push_back(c);
    }
    CellResult failed;
    failed.profile_id = 3;
    failed.profile_name = "p3";
    failed.variant = VariantKind::Cdae;
    failed.error = "stage failed: \"x\", y";
    r.cells.push_back(failed);
    sort_cells(r.cells);
    CHECK(r.cells[0].profile_id == 1);
    CHECK(r.cells[2].profile_id == 3);
    CHECK(r.cells[2].variant == VariantKind::Cae);
    CHECK(r.cells[3].variant == VariantKind::Cdae);
    CHECK(r.failures() == 1);
    CHECK(r.variants() == std::vector<VariantKind>{VariantKind::Cae});
    CHECK(r.average(VariantKind::Cae) == aggregate(rows));
    CHECK_THROWS_AS(r.average(VariantKind::Csae), DomainError);

    const auto csv = report_csv(r);
    CHECK(parse_report_csv(csv) == r);

    const auto text = report_text(r);
    CHECK(text.find("97.33") != std::string::npos);
    CHECK(text.find("91.33") != std::string::npos);
    CHECK(text.find("94.08") != std::string::npos);
    CHECK(text.find("1 cell(s) failed") != std::string::npos);

    try {
        auto bad = csv;
        bad.replace(bad.find(",ok,"), 4, ",maybe,");
        parse_report_csv(bad, "r.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);  // two metadata lines, header, first row
    }
    CHECK_THROWS_AS(parse_report_csv("nope\n"), ParseError);
    CHECK_THROWS_AS(load_report_csv("/nonexistent/report.csv"), IoError);
}

TEST_CASE("experiment config") {
    const auto c = tiny_experiment();
    const auto kv = c.to_kv();
    CHECK(!kv.contains("gan.seed"));
    const auto back = ExperimentConfig::from_kv(KeyValueFile::parse(kv.to_string()));
    CHECK(back.to_kv().to_string() == kv.to_string());
    CHECK(back.profiles == c.profiles);
    CHECK(back.variants == c.variants);

    const auto defaults = ExperimentConfig::from_kv(KeyValueFile::parse(""));
    CHECK(defaults.profiles.size() == 12);
    CHECK(defaults.variants.size() == 3);
    CHECK(defaults.gan.lambda_gp == 20.0);
    CHECK(defaults.detectors.at(VariantKind::Cdae).noise_factor == 0.3);

    CHECK_THROWS_AS(ExperimentConfig::from_kv(KeyValueFile::parse("gan.lamda_gp=3\n")), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::from_kv(KeyValueFile::parse("cae.seed=3\n")), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::from_kv(KeyValueFile::parse("variants=cae,vae\n")), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::from_kv(KeyValueFile::parse("profiles=13\n")), DomainError);
}

TEST_CASE("run_experiment") {
    auto c = tiny_experiment();
    // Eight stride-2 layers cannot fit Q = 128: every CAE cell fails.
    c.detectors.at(VariantKind::Cae).encoder_channels.assign(8, 2);
    const auto dir = std::filesystem::temp_directory_path() / "jamdet_test_experiment";
    std::filesystem::remove_all(dir);
    c.output_dir = dir.string();

    std::vector<std::string> log;
    const auto serial = run_experiment(c, [&](const std::string& m) { log.push_back(m); });
    REQUIRE(serial.cells.size() == 4);
    CHECK(serial.cells[0].profile_id == 2);
    CHECK(serial.cells[0].variant == VariantKind::Cae);
    CHECK(serial.cells[3].profile_id == 11);
    CHECK(serial.cells[3].variant == VariantKind::Csae);
    CHECK(serial.failures() == 2);
    for (const auto& cell : serial.cells) {
        if (cell.variant == VariantKind::Cae) {
            CHECK(!cell.ok);
            CHECK(cell.error.find("too short") != std::string::npos);
        } else {
            CHECK(cell.ok);
            // 20% per class: profile 11 keeps all 638 real jammed rows.
            const std::size_t jammed = cell.profile_id == 11 ? 128 : 120;
            CHECK(cell.confusion.tp + cell.confusion.fn == jammed);
            CHECK(cell.confusion.total() == jammed + 120);
            CHECK(cell.metrics == metrics(cell.confusion));
        }
    }
    CHECK(serial.average(VariantKind::Csae) == aggregate({serial.cells[1].metrics, serial.cells[3].metrics}));
    CHECK(serial.metadata.at("seed") == "5");
    CHECK(!log.empty());
    CHECK(load_report_csv((dir / "report.csv").string()) == serial);
    CHECK(std::filesystem::exists(dir / "profile_2" / "gan_loss.csv"));
    CHECK(std::filesystem::exists(dir / "profile_11" / "csae_loss.csv"));

    c.jobs = 3;
    c.output_dir.clear();
    CHECK(run_experiment(c) == serial);
    std::filesystem::remove_all(dir);
}
