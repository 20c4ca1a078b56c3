#include "doctest.h"

#include "jamdet/data/csv.hpp"
#include "jamdet/data/profiles.hpp"
#include "jamdet/error.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

using namespace jamdet;
using namespace jamdet::data;
using phy::cplx;

namespace {

Dataset table(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    Dataset ds;
    for (std::size_t i = 0; i < rows.size(); ++i) ds.observations.push_back({rows[i], labels[i], false});
    return ds;
}

// Small frames keep the build tests fast; Q = 2 * 128.
BuildOptions small_options() {
    BuildOptions o;
    o.ofdm.fft_size = 256;
    o.ofdm.cp_len = 18;
    o.ofdm.num_symbols = 4;
    o.ofdm.ssb_symbol_index = 1;
    o.ofdm.ssb_num_symbols = 2;
    o.ofdm.ssb_num_subcarriers = 128;
    o.ofdm.sample_rate_hz = 3.84e6;
    return o;
}

std::filesystem::path scratch() {
    const auto dir = std::filesystem::temp_directory_path() / "jamdet_test_dataset";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("featurize") {
    CHECK(featurize({cplx(3.0, 0.0)}) == std::vector<double>{3.0});
    CHECK(featurize({cplx(0.6, 0.8)})[0] == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<cplx> x = {{1, 2}, {-0.5, 0.25}, {0, -3}};
    auto rotated = x;
    for (auto& v : rotated) v *= std::polar(1.0, 0.77);
    const auto a = featurize(x), b = featurize(rotated);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
    CHECK_THROWS_AS(featurize({}), DomainError);
}

TEST_CASE("inject_awgn") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    std::vector<cplx> x(10000);
    for (auto& v : x) v = {n01(rng), n01(rng)};
    double p = 0.0;
    for (const auto& v : x) p += std::norm(v);
    p /= static_cast<double>(x.size());

    const auto same = inject_awgn(x, 300.0, 5);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(same[i] - x[i]) <= 1e-12);

    for (double target : {0.0, 5.0, 10.0, 15.0}) {
        const auto y = inject_awgn(x, target, 42);
        double noise = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) noise += std::norm(y[i] - x[i]);
        noise /= static_cast<double>(x.size());
        CHECK(std::abs(10.0 * std::log10(p / noise) - target) <= 0.5);
    }
    CHECK(inject_awgn(x, 7.0, 3) == inject_awgn(x, 7.0, 3));
    CHECK_THROWS_AS(inject_awgn(std::vector<cplx>(4), 10.0, 1), DomainError);
}

TEST_CASE("builtin profiles") {
    // Published rows: id, total, jammed, non-jammed.
    struct Row {
        int id;
        std::size_t total, jammed, non_jammed;
    };
    const Row published[] = {{1, 826, 793, 33},  {2, 544, 518, 26},  {3, 971, 933, 32},  {4, 1038, 998, 40},
                             {5, 877, 839, 38},  {6, 989, 945, 44},  {7, 805, 771, 34},  {8, 923, 886, 37},
                             {9, 749, 719, 30},  {10, 833, 799, 34}, {11, 664, 638, 27}, {12, 978, 937, 41}};
    const auto& all = builtin_profiles();
    REQUIRE(all.size() == 12);
    for (const auto& row : published) {
        CAPTURE(row.id);
        const auto& p = profile_by_id(row.id);
        CHECK_NOTHROW(p.validate());
        CHECK(p.jammed == row.jammed);
        CHECK(p.non_jammed == row.non_jammed);
        CHECK(p.jammed + p.non_jammed == p.total);
        const bool consistent = row.jammed + row.non_jammed == row.total;
        CHECK(consistent == (row.id != 3 && row.id != 11));
        if (consistent) CHECK(p.total == row.total);
    }
    CHECK(profile_by_id(1).total == 826);
    CHECK(profile_by_id(1).jammed == 793);
    CHECK(profile_by_id(1).non_jammed == 33);
    CHECK(profile_by_id(4).total == 1038);
    CHECK(profile_by_id(4).jammed == 998);
    CHECK(profile_by_id(4).non_jammed == 40);
    CHECK_THROWS_AS(profile_by_id(13), DomainError);
    CHECK_THROWS_AS(profile_by_id(0), DomainError);
}

TEST_CASE("build_profile") {
    const auto opts = small_options();
    const auto ds = build_profile(profile_by_id(1), opts, 7);
    CHECK(ds.size() == 826);
    CHECK(ds.count(kJammed) == 793);
    CHECK(ds.count(kNonJammed) == 33);
    CHECK(ds.feature_dim() == 256);
    CHECK_NOTHROW(ds.validate());
    CHECK(ds == build_profile(profile_by_id(1), opts, 7));
    CHECK(!(ds == build_profile(profile_by_id(1), opts, 8)));

    // Clean rows are unit-modulus constellation points times one frame gain,
    // so their features barely vary; jammed rows spread.
    double clean_spread = 0.0, jammed_spread = 0.0;
    for (const auto& o : ds.observations) {
        const auto [lo, hi] = std::minmax_element(o.features.begin(), o.features.end());
        (o.label == kJammed ? jammed_spread : clean_spread) = std::max(
            o.label == kJammed ? jammed_spread : clean_spread, *hi - *lo);
    }
    CHECK(clean_spread <= 1e-6);
    CHECK(jammed_spread > 0.1);

    BuildOptions reversed = opts;
    reversed.snr_min_db = 10.0;
    reversed.snr_max_db = 5.0;
    CHECK_THROWS_AS(build_profile(profile_by_id(2), reversed, 1), DomainError);
    DatasetProfile bad{0, "bad", 5, 5, 0};
    CHECK_THROWS_AS(build_profile(bad, opts, 1), DomainError);
}

TEST_CASE("normalize") {
    const auto ds = table({{2, 5}, {4, 5}, {6, 5}}, {0, 1, 1});
    const auto n = normalize(ds);
    CHECK(n.normalized);
    CHECK(n.observations[0].features == std::vector<double>{0.0, 0.0});
    CHECK(n.observations[1].features == std::vector<double>{0.5, 0.0});
    CHECK(n.observations[2].features == std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(normalize(n), StateError);
    CHECK(normalize_with(ds, n.norm_stats) == n);

    const auto built = build_profile(profile_by_id(2), small_options(), 3);
    const auto nb = normalize(built);
    for (std::size_t i = 0; i < built.size(); ++i) {
        const auto back = denormalize(nb.observations[i].features, nb.norm_stats);
        for (std::size_t j = 0; j < back.size(); ++j) {
            CHECK(nb.observations[i].features[j] >= 0.0);
            CHECK(nb.observations[i].features[j] <= 1.0);
            CHECK(std::abs(back[j] - built.observations[i].features[j]) <= 1e-9);
        }
    }
}

TEST_CASE("split_train_test") {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 1000; ++i) {
        rows.push_back({static_cast<double>(i)});
        labels.push_back(i % 10 == 0 ? 0 : 1);
    }
    const auto ds = table(rows, labels);
    const auto [train, test] = split_train_test(ds, 0.8, 11);
    CHECK(train.size() == 800);
    CHECK(test.size() == 200);
    CHECK(test.count(0) == 20);
    CHECK(test.count(1) == 180);
    const double full_ratio = 100.0 / 1000.0;
    CHECK(std::abs(static_cast<double>(train.count(0)) - full_ratio * 800.0) <= 1.0);

    std::multiset<double> all;
    for (const auto& o : train.observations) all.insert(o.features[0]);
    for (const auto& o : test.observations) all.insert(o.features[0]);
    CHECK(all.size() == 1000);
    CHECK(std::set<double>(all.begin(), all.end()).size() == 1000);

    const auto again = split_train_test(ds, 0.8, 11);
    CHECK(again.first == train);
    CHECK(again.second == test);
    CHECK(!(split_train_test(ds, 0.8, 12).second == test));

    // One-member class stays in train.
    const auto tiny = table({{1}, {2}, {3}, {4}}, {0, 1, 1, 1});
    const auto [tt, te] = split_train_test(tiny, 0.5, 1);
    CHECK(tt.count(0) == 1);
    CHECK(te.count(0) == 0);
    CHECK_THROWS_AS(split_train_test(ds, 1.0, 1), DomainError);
    CHECK_THROWS_AS(split_train_test(ds, 0.0, 1), DomainError);
}

TEST_CASE("CSV round trip and errors") {
    const auto dir = scratch();
    auto ds = normalize(build_profile(profile_by_id(11), small_options(), 5));
    ds.observations.push_back({ds.observations.front().features, kNonJammed, true});
    const std::string path = (dir / "ds.csv").string();
    save_csv(ds, path);
    CHECK(load_csv(path) == ds);

    {
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header.rfind("f0,f1,", 0) == 0);
        CHECK(header.size() >= 10);
        CHECK(header.substr(header.size() - 10) == "f255,label");
    }

    auto parse_line = [](const std::string& text) {
        try {
            parse_csv(text, "mem");
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(parse_line("f0,f1,label\n0.1,0.2,1\n0.5,0\n") == 3);
    CHECK(parse_line("f0,f1,label\n0.1,0.2,1\n0.1,0.2,2\n") == 3);
    CHECK(parse_line("f0,f1,label\n0.1,x,1\n") == 2);
    CHECK(parse_line("f0,f2,label\n0.1,0.2,1\n") == 1);
    CHECK(parse_line("f0,label\n-1,1\n") == 2);

    CHECK_THROWS_AS(load_csv((dir / "nope.csv").string()), IoError);

    Dataset mixed = ds;
    std::swap(mixed.observations.front(), mixed.observations.back());
    CHECK_THROWS_AS(save_csv(mixed, (dir / "mixed.csv").string()), StateError);
    std::filesystem::remove_all(dir);
}
