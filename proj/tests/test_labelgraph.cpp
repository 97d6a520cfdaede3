#include <doctest.h>

#include "adrl/error.hpp"
#include "adrl/labelgraph.hpp"
#include "adrl/optim.hpp"
#include "oracles.hpp"

using namespace adrl;

namespace {

Matrix random_binary(std::size_t r, std::size_t c, double p, RngStream& rng) {
    Matrix m(r, c);
    for (double& x : m.data()) x = rng.uniform() < p ? 1.0 : 0.0;
    return m;
}

}  // namespace

TEST_CASE("co-occurrence matches counting") {
    RngStream rng(31, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(30), c = 1 + rng.below(7);
        const Matrix y = random_binary(n, c, 0.4, rng);
        const Matrix g = random_binary(n, c, 0.7, rng);
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < n; ++i)
            if (rng.uniform() < 0.8) rows.push_back(i);
        const Matrix q = cooccurrence(y, g, rows);
        REQUIRE(q == oracle::cooccurrence(y, g, rows));
        for (std::size_t i = 0; i < c; ++i) {
            bool seen = false;
            for (std::size_t k : rows) seen = seen || (y(k, i) == 1.0 && g(k, i) == 1.0);
            if (seen) {
                CHECK(q(i, i) == 1.0);
            } else {
                for (std::size_t j = 0; j < c; ++j) CHECK(q(i, j) == 0.0);
            }
        }
    }
}

TEST_CASE("co-occurrence worked example") {
    const Matrix y{{1, 1, 0}, {1, 0, 0}, {1, 1, 1}, {0, 1, 0}};
    const Matrix g{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 0, 1}};
    const std::vector<std::size_t> rows = {0, 1, 2, 3};
    const Matrix q = cooccurrence(y, g, rows);
    CHECK(q(0, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(q(1, 0) == 1.0);  // label 1 observed positive in rows 0 and 2 only
    CHECK(q(2, 0) == 1.0);
    CHECK(q(0, 2) == doctest::Approx(1.0 / 3.0));
    const Matrix nb = neighbor_mask(q);
    CHECK(nb(0, 0) == 1.0);
    CHECK(nb(0, 2) == 1.0);
    CHECK_THROWS_AS(cooccurrence(y, Matrix(4, 2), rows), ConfigError);
}

TEST_CASE("graph attention matches the step-by-step oracle") {
    RngStream rng(32, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t c = 5, d = 4;
        GraphAttention gat(d, 2, 0.2, rng);
        // Randomize so that leaky and positive branches both occur.
        gat.attn.value = oracle::random_matrix(d, 2, rng);
        const Matrix z = oracle::random_matrix(c, d, rng);
        Matrix q = random_binary(c, c, 0.5, rng);
        for (std::size_t i = 0; i < c; ++i) q(i, i) = 1.0;
        if (trial == 0) q = Matrix::identity(c);

        Tape t;
        const GatOutput out = gat_refine(t, gat, t.constant(z), q);
        Matrix alpha;
        std::vector<Matrix> heads;
        for (const Parameter& h : gat.heads) heads.push_back(h.value);
        const Matrix want = oracle::gat(z, q, gat.attn.value, gat.projection.value, heads, 0.2, &alpha);
        CHECK(max_abs_diff(out.refined.value(), want) <= 1e-12);
        CHECK(max_abs_diff(out.attention.value(), alpha) <= 1e-12);
        for (std::size_t i = 0; i < c; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                s += out.attention.value()(i, j);
                if (i != j && q(i, j) == 0.0) CHECK(out.attention.value()(i, j) == 0.0);
            }
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("graph attention gradients") {
    RngStream rng(33, 0);
    GraphAttention gat(4, 2, 0.2, rng);
    Parameter z("z", oracle::random_matrix(5, 4, rng));
    Matrix q = random_binary(5, 5, 0.6, rng);
    const Matrix r = oracle::random_matrix(5, 4, rng);
    const LossFn loss = [&](Tape& t) { return ad::weighted_sum(gat_refine(t, gat, t.param(z), q).refined, r); };
    std::vector<Parameter*> ps{&z};
    gat.collect(ps);
    CHECK(grad_check(loss, ps, 1e-5, 1e-6).passed);
}

TEST_CASE("label embeddings") {
    RngStream rng(34, 0);
    LabelPrototypes protos(4, 3, 2, 0.2, rng);
    CHECK(protos.seeds.value == Matrix::identity(4));
    const Matrix q = Matrix::identity(4);
    Tape t;
    const LabelEmbeddings ev = label_embeddings(t, protos, q, nullptr);
    CHECK(ev.embeddings.value() == ev.refined_mean.value());
    for (double v : ev.refined_var.value().data()) CHECK(v >= 1e-6);
    RngStream noise(1, 1);
    const LabelEmbeddings tr = label_embeddings(t, protos, q, &noise);
    CHECK(tr.embeddings.value() != tr.refined_mean.value());
}
