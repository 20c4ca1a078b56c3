#include "doctest.h"
#include "gradcheck.hpp"

#include "jamdet/error.hpp"
#include "jamdet/gan/cwgan.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>

using namespace jamdet;
using namespace jamdet::gan;
using ad::Tensor;

namespace {

GanConfig tiny_config() {
    GanConfig c;
    c.critic_channels = {4, 6, 8};
    c.generator_channels = {6, 4};
    c.latent_dim = 8;
    c.batch_size = 8;
    c.epochs = 2;
    c.n_critic = 2;
    c.seed = 3;
    return c;
}

data::Dataset two_class(std::size_t zeros, std::size_t ones, std::size_t q, std::uint64_t seed) {
    data::Dataset ds;
    ds.normalized = true;
    ds.norm_stats.min.assign(q, 0.0);
    ds.norm_stats.max.assign(q, 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < zeros + ones; ++i) {
        data::SSBObservation o;
        o.label = i < zeros ? 0 : 1;
        o.features.resize(q);
        for (auto& f : o.features) f = u(rng);
        ds.observations.push_back(o);
    }
    return ds;
}

Tensor column(const std::vector<double>& v) { return Tensor::from({v.size(), 1}, v); }

}  // namespace

TEST_CASE("interpolate") {
    const Tensor real = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    const Tensor fake = Tensor::from({2, 3}, {-1, 0, 7, 4, 1, 0});
    const auto at_one = interpolate(real, fake, {1.0, 1.0});
    const auto at_zero = interpolate(real, fake, {0.0, 0.0});
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(at_one[i] == real[i]);
        CHECK(at_zero[i] == fake[i]);
    }
    const auto mid = interpolate(real, fake, {0.3, 0.8});
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(mid[i] >= std::min(real[i], fake[i]));
        CHECK(mid[i] <= std::max(real[i], fake[i]));
    }
    CHECK(mid[0] == doctest::Approx(0.3 * 1 + 0.7 * -1));
    CHECK_THROWS_AS(interpolate(real, Tensor::zeros({3, 2}), {0.5, 0.5}), ShapeError);
    CHECK_THROWS_AS(interpolate(real, fake, {0.5}), ShapeError);
}

TEST_CASE("losses") {
    CHECK(critic_loss(column({2}), column({1}), Tensor::scalar(0.5)).item() == doctest::Approx(-0.5));
    CHECK(critic_loss(column({1.5, -2}), column({1.5, -2}), Tensor::scalar(0.0)).item() == 0.0);
    const double base = critic_loss(column({0.3, 1.1}), column({-0.4, 2.0}), Tensor::scalar(0.2)).item();
    const double shifted = critic_loss(column({10.3, 11.1}), column({9.6, 12.0}), Tensor::scalar(0.2)).item();
    CHECK(shifted == doctest::Approx(base).epsilon(1e-12));

    CHECK(generator_loss(column({1})).item() == -1.0);
    CHECK(generator_loss(column({0, 2})).item() == -1.0);
    CHECK(generator_loss(column({0, 2.5})).item() < generator_loss(column({0, 2})).item());
}

TEST_CASE("gradient penalty") {
    const Tensor x = Tensor::from({3, 2}, {0.1, 0.2, -1, 3, 0.5, 0.5});
    {
        const Tensor w = Tensor::from({1, 2}, {0.6, 0.8});
        const auto gp = gradient_penalty([&](const Tensor& in) { return ad::dense(in, w, Tensor::zeros({1})); }, x, 20.0);
        CHECK(gp.value.item() == doctest::Approx(0.0).epsilon(1e-15));
    }
    {
        const Tensor w = Tensor::from({1, 2}, {0.0, 3.0});
        const auto gp = gradient_penalty([&](const Tensor& in) { return ad::dense(in, w, Tensor::zeros({1})); }, x, 20.0);
        CHECK(std::abs(gp.value.item() - 80.0) <= 1e-9);
    }
    // Through the real critic architecture, second order.
    GanConfig c = tiny_config();
    std::mt19937_64 rng(5);
    Critic critic(8, c, rng);
    const Tensor xh = gradcheck::random_tensor({3, 8}, rng, -1, 1, false);
    const std::vector<int> labels = {0, 1, 1};
    const auto params = critic.parameters();
    const auto loss = [&] {
        return gradient_penalty([&](const Tensor& in) { return critic.forward(in, labels, true, 77); }, xh, 20.0).value;
    };
    CHECK(loss().item() >= 0.0);
    CHECK(gradcheck::max_relative_error(loss, ad::trainable(params)) <= 1e-4);
}

TEST_CASE("network shapes and ranges") {
    GanConfig c = tiny_config();
    GanModel m = make_model(c, 12);
    std::mt19937_64 rng(1);
    const Tensor z = gradcheck::random_tensor({5, c.latent_dim}, rng, -3, 3, false);
    const std::vector<int> labels = {0, 1, 0, 1, 1};
    const Tensor g = m.generator.forward(z, labels, true);
    CHECK(g.shape() == ad::Shape{5, 12});
    for (double v : g.values()) CHECK(std::abs(v) <= 1.0);
    CHECK(m.critic.forward(g, labels, true, 1).shape() == ad::Shape{5, 1});
    // Critic has no normalization layers.
    for (const auto& p : m.critic.parameters()) CHECK(p.name.find("bn") == std::string::npos);
    CHECK_THROWS_AS(m.generator.forward(z, {0, 1}, true), ShapeError);
    CHECK_THROWS_AS(label_channels({2}, 4), DomainError);

    // Conditioning changes the output.
    const Tensor g0 = m.generator.forward(z, std::vector<int>(5, 0), false);
    const Tensor g1 = m.generator.forward(z, std::vector<int>(5, 1), false);
    CHECK(std::vector<double>(g0.values().begin(), g0.values().end()) !=
          std::vector<double>(g1.values().begin(), g1.values().end()));

    // One learned latent scale vector per class, starting at 1, and it
    // receives gradient only from rows of its class.
    const auto params = m.generator.parameters();
    REQUIRE(params.front().name == "generator.embedding");
    Tensor embedding = params.front().tensor;
    CHECK(embedding.shape() == ad::Shape{2, c.latent_dim});
    for (double v : embedding.values()) CHECK(v == 1.0);
    embedding.zero_grad();
    ad::backward(ad::sum(m.generator.forward(z, std::vector<int>(5, 1), true)));
    bool class1_moved = false;
    for (std::size_t j = 0; j < c.latent_dim; ++j) {
        CHECK(embedding.grad()[j] == 0.0);
        class1_moved = class1_moved || embedding.grad()[c.latent_dim + j] != 0.0;
    }
    CHECK(class1_moved);
}

TEST_CASE("training contract") {
    const GanConfig c = tiny_config();
    const auto ds = two_class(20, 30, 12, 1);
    const auto a = train(c, ds);
    const auto b = train(c, ds);
    CHECK(a.history == b.history);
    CHECK(a.history.size() == c.epochs * 7);  // ceil(50 / 8) steps per epoch
    CHECK(a.history.back().epoch == 2);
    for (const auto& r : a.history) {
        CHECK(std::isfinite(r.critic_loss));
        CHECK(std::isfinite(r.gen_loss));
    }
    GanConfig other = c;
    other.seed = 4;
    CHECK(!(train(other, ds).history == a.history));

    CHECK_THROWS_AS(train(c, two_class(0, 10, 12, 1)), DomainError);
    auto raw = ds;
    raw.normalized = false;
    CHECK_THROWS_AS(train(c, raw), DomainError);

    const auto csv = loss_history_csv(a.history);
    CHECK(csv.rfind("step,critic_loss,gen_loss,wasserstein_estimate\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(a.history.size() + 1));
}

TEST_CASE("augment_to_balance") {
    GanConfig c = tiny_config();
    GanModel m = make_model(c, 6);
    const auto ds = two_class(33, 793, 6, 2);
    const auto out = augment_to_balance(m.generator, ds, 2500, 250, 9);
    CHECK(out.size() == 5000);
    CHECK(out.count(0) == 2500);
    CHECK(out.count(1) == 2500);
    CHECK(out.size() - ds.size() == 2467 + 1707);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(out.observations[i] == ds.observations[i]);
    }
    for (std::size_t i = ds.size(); i < out.size(); ++i) {
        CHECK(out.observations[i].synthetic);
        for (double v : out.observations[i].features) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(out == augment_to_balance(m.generator, ds, 2500, 250, 9));

    // A class already above target is left alone.
    const auto big = two_class(5, 40, 6, 3);
    const auto capped = augment_to_balance(m.generator, big, 30, 7, 1);
    CHECK(capped.count(1) == 40);
    CHECK(capped.count(0) == 30);
}

TEST_CASE("wasserstein_1d") {
    CHECK(wasserstein_1d({1, 2, 3}, {3, 1, 2}) == 0.0);
    CHECK(wasserstein_1d({0}, {1}) == 1.0);
    CHECK_THROWS_AS(wasserstein_1d({}, {1}), DomainError);

    // Sorted matching equals the best of all 4! assignments.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n01;
        std::vector<double> a(4), b(4);
        for (auto& v : a) v = n01(rng);
        for (auto& v : b) v = n01(rng);
        std::vector<int> perm = {0, 1, 2, 3};
        double best = 1e300;
        do {
            double cost = 0.0;
            for (int i = 0; i < 4; ++i) cost += std::abs(a[i] - b[perm[i]]);
            best = std::min(best, cost / 4.0);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(wasserstein_1d(a, b) == doctest::Approx(best).epsilon(1e-12));
    }

    // Unequal sizes: replicating every sample k times leaves the distribution unchanged.
    std::vector<double> a = {0.1, 0.7, 0.3}, b = {0.5, 0.2};
    std::vector<double> a2, b3;
    for (double v : a) a2.insert(a2.end(), 2, v);
    for (double v : b) b3.insert(b3.end(), 3, v);
    CHECK(wasserstein_1d(a, b) == doctest::Approx(wasserstein_1d(a2, b3)).epsilon(1e-12));
    CHECK(wasserstein_1d({0.0}, {0.0, 1.0}) == doctest::Approx(0.5));
}

TEST_CASE("model checkpoint round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "jamdet_test_cwgan";
    std::filesystem::create_directories(dir);
    const GanConfig c = tiny_config();
    auto m = train(c, two_class(10, 14, 6, 4));
    const std::string path = (dir / "gan.ckpt").string();
    save_model(m, path);
    auto back = load_model(path);
    CHECK(sample(back.generator, 1, 5, 3) == sample(m.generator, 1, 5, 3));
    CHECK(back.config.critic_channels == c.critic_channels);
    std::filesystem::remove_all(dir);
}
