#include <doctest.h>

#include <cmath>
#include <numbers>

#include "adrl/error.hpp"
#include "adrl/fusion.hpp"
#include "adrl/optim.hpp"
#include "oracles.hpp"

using namespace adrl;

namespace {

double manifold_oracle(const Matrix& z, const Matrix& p) {
    const std::size_t n = z.rows();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double zz = 0.0, pp = 0.0;
            for (std::size_t k = 0; k < z.cols(); ++k) zz += z(i, k) * z(j, k);
            for (std::size_t k = 0; k < p.cols(); ++k) pp += p(i, k) * p(j, k);
            const double s = (1.0 + zz) / 2.0;
            const double t = std::clamp(pp, 0.0, 1.0);
            total -= t * std::log(s) + (1.0 - t) * std::log(1.0 - s);
        }
    }
    return total / static_cast<double>(n * (n - 1));
}

Matrix unit_rows(Matrix m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (double x : m.row(i)) s += x * x;
        for (double& x : m.row(i)) x /= std::sqrt(s);
    }
    return m;
}

}  // namespace

TEST_CASE("label specific features") {
    const Matrix l{{0, 100}, {-100, 0}};
    const Matrix z{{2, 4}};
    const auto f = label_specific_features(l, z);
    REQUIRE(f.size() == 2);
    CHECK(f[0](0, 0) == 1.0);
    CHECK(f[0](0, 1) == doctest::Approx(4.0));
    CHECK(f[1](0, 0) == doctest::Approx(0.0));
    CHECK(f[1](0, 1) == 2.0);
}

TEST_CASE("pseudo prediction matches per-class heads") {
    RngStream rng(41, 0);
    ClassHeads heads("h", 3, 4, rng);
    const Matrix l = oracle::random_matrix(3, 4, rng);
    const Matrix z = oracle::random_matrix(5, 4, rng);
    Tape t;
    const Matrix p = pseudo_predict(t, heads, t.constant(l), t.constant(z)).value();
    const auto feats = label_specific_features(l, z);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            double s = heads.bias.value(0, c);
            for (std::size_t k = 0; k < 4; ++k) s += heads.weight.value(c, k) * feats[c](i, k);
            CHECK(p(i, c) == doctest::Approx(1.0 / (1.0 + std::exp(-s))).epsilon(1e-12));
        }
    }
}

TEST_CASE("pseudo prediction is clamped") {
    RngStream rng(42, 0);
    ClassHeads heads("h", 2, 2, rng);
    heads.weight.value.fill(100.0);
    heads.bias.value.fill(0.0);
    Tape t;
    const Matrix p =
        pseudo_predict(t, heads, t.constant(Matrix(2, 2, 50.0)), t.constant(Matrix{{5, 5}, {-5, -5}})).value();
    CHECK(p(0, 0) == 1.0 - kProbClamp);
    CHECK(p(1, 0) == kProbClamp);
}

TEST_CASE("manifold loss double sum") {
    SUBCASE("orthogonal features, identical labels: log 2") {
        Tape t;
        const double v = manifold_loss(t, t.constant(Matrix{{1, 0}, {0, 1}}),
                                       t.constant(Matrix{{1, 0}, {1, 0}})).scalar();
        CHECK(v == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
    }
    SUBCASE("single sample") {
        Tape t;
        CHECK(manifold_loss(t, t.constant(Matrix{{1, 0}}), t.constant(Matrix{{1}})).scalar() == 0.0);
    }
    SUBCASE("random N=4 against the oracle") {
        RngStream rng(43, 0);
        for (int trial = 0; trial < 50; ++trial) {
            const Matrix z = unit_rows(oracle::random_matrix(4, 3, rng));
            const Matrix p = unit_rows(oracle::random_matrix(4, 2, rng, -0.5, 2.0));
            Tape t;
            const double v = manifold_loss(t, t.constant(z), t.constant(p)).scalar();
            CHECK(std::abs(v - manifold_oracle(z, p)) <= 1e-12);
        }
    }
}

TEST_CASE("manifold loss gradient") {
    RngStream rng(44, 0);
    Parameter z("z", oracle::random_matrix(6, 3, rng));
    Parameter p("p", oracle::random_matrix(6, 4, rng, 0.1, 1.0));
    const LossFn loss = [&](Tape& t) {
        return manifold_loss(t, ad::row_normalize(t.param(z)), ad::row_normalize(t.param(p)));
    };
    Parameter* ps[] = {&z, &p};
    const auto rep = grad_check(loss, ps, 1e-5, 1e-6);
    INFO(rep.max_rel_error);
    CHECK(rep.passed);
}

TEST_CASE("reciprocal fusion weights") {
    const double l1[] = {1.0, 3.0};
    const auto w = fusion_weights(l1);
    CHECK(w[0] == doctest::Approx(0.75));
    CHECK(w[1] == doctest::Approx(0.25));
    const double l2[] = {0.0, 0.0, 0.0};
    for (double x : fusion_weights(l2)) CHECK(x == doctest::Approx(1.0 / 3.0));
    const double l3[] = {0.0, 1.0};
    CHECK(fusion_weights(l3)[0] == doctest::Approx(1.0 / (1.0 + 1e-8)));
    CHECK_THROWS_AS(fusion_weights(std::span<const double>{}), ConfigError);

    Tape t;
    const Var reps[] = {t.constant(Matrix{{4.0}}), t.constant(Matrix{{8.0}})};
    CHECK(fuse_channel(reps, l1).scalar() == doctest::Approx(5.0));
}

TEST_CASE("gate fusion") {
    Tape t;
    const Matrix g = gate_fuse(t.constant(Matrix{{2.0, -4.0}}), t.constant(Matrix{{0.0, 100.0}})).value();
    CHECK(g(0, 0) == 1.0);
    CHECK(g(0, 1) == doctest::Approx(-4.0));
}

TEST_CASE("masked cross-entropy") {
    Tape t;
    const Matrix p{{0.9, 0.2}, {0.5, 0.7}};
    const Matrix y{{1, 0}, {0, 1}};
    const Matrix g{{1, 1}, {0, 1}};
    const double v = masked_ce(t, t.constant(p), y, g).scalar();
    CHECK(v == doctest::Approx(-(std::log(0.9) + std::log(0.8) + std::log(0.7)) / 3.0).epsilon(1e-14));
    CHECK(masked_ce(t, t.constant(p), y, Matrix(2, 2)).scalar() == 0.0);
    CHECK_THROWS_AS(masked_ce(t, t.constant(p), Matrix(2, 3), g), ConfigError);
}

TEST_CASE("total loss") {
    Tape t;
    LossComponents parts;
    parts.mce = t.constant(Matrix{{2.0}});
    parts.re = t.constant(Matrix{{3.0}});
    parts.gc = t.constant(Matrix{{0.5}});
    const double v = total_loss(t, parts, {1.0, 0.1, 0.01}).scalar();
    CHECK(v == doctest::Approx(2.0 + 0.3 + 0.5));
    parts.pmce = t.constant(Matrix{{10.0}});
    parts.dis = t.constant(Matrix{{-1.0}});
    CHECK(total_loss(t, parts, {2.0, 0.0, 0.5}).scalar() == doctest::Approx(4.0 + 5.0 + 0.5 - 1.0));
}
