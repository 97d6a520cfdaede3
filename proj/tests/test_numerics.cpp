#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "adrl/autodiff.hpp"
#include "adrl/error.hpp"
#include "adrl/matrix.hpp"
#include "adrl/optim.hpp"
#include "adrl/rng.hpp"
#include "oracles.hpp"

using namespace adrl;

namespace {

// Checks d/dx of sum(op(x...) .* R) for a random R.
void check_op(const std::string& name, std::vector<Matrix> inputs,
              const std::function<Var(Tape&, std::vector<Var>&)>& op, double tol = 1e-6) {
    std::vector<Parameter> params;
    for (std::size_t k = 0; k < inputs.size(); ++k)
        params.emplace_back(name + std::to_string(k), inputs[k]);
    RngStream rng(99, 1);
    Matrix r;
    const LossFn loss = [&](Tape& t) {
        std::vector<Var> vars;
        for (Parameter& p : params) vars.push_back(t.param(p));
        const Var out = op(t, vars);
        if (r.empty()) r = oracle::random_matrix(out.rows(), out.cols(), rng);
        return ad::weighted_sum(out, r);
    };
    std::vector<Parameter*> ptrs;
    for (Parameter& p : params) ptrs.push_back(&p);
    const GradCheckReport rep = grad_check(loss, ptrs, 1e-5, tol);
    INFO(name << " max rel error " << rep.max_rel_error);
    CHECK(rep.passed);
}

}  // namespace

TEST_CASE("matrix basics") {
    Matrix a{{1, 2}, {3, 4}};
    CHECK(a.rows() == 2);
    CHECK(a(1, 0) == 3);
    CHECK(a.transposed()(0, 1) == 3);
    const Matrix b = matmul(a, Matrix::identity(2));
    CHECK(b == a);
    CHECK(matmul_nt(a, a)(0, 1) == doctest::Approx(11));
    CHECK(matmul_tn(a, a)(0, 1) == doctest::Approx(14));
    const std::size_t idx[] = {1, 1, 0};
    const Matrix s = a.select_rows(idx);
    CHECK(s.rows() == 3);
    CHECK(s(2, 1) == 2);
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ConfigError);
}

TEST_CASE("rng is counter based and reproducible") {
    RngStream a(7, 3), b(7, 3), c(7, 4);
    for (int k = 0; k < 100; ++k) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
    }
    RngStream u(1, 1);
    double mean = 0, var = 0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        const double z = u.normal();
        mean += z / n;
        var += z * z / n;
    }
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - 1.0) < 0.05);
    RngStream p(5, 0);
    auto perm = p.permutation(50);
    std::sort(perm.begin(), perm.end());
    for (std::size_t k = 0; k < 50; ++k) CHECK(perm[k] == k);
    for (int k = 0; k < 1000; ++k) CHECK(p.below(7) < 7);
}

TEST_CASE("forward_backward: linear case") {
    Parameter w("W", Matrix::identity(2));
    Tape t;
    const Var loss = ad::sum(ad::matmul(t.param(w), t.constant(Matrix{{1.0}, {2.0}})));
    CHECK(loss.scalar() == 3.0);
    t.backward(loss);
    CHECK(w.grad == Matrix{{1, 2}, {1, 2}});
}

TEST_CASE("forward_backward: sigmoid at zero") {
    Parameter x("x", Matrix(1, 1));
    Tape t;
    const Var s = ad::sigmoid(t.param(x));
    CHECK(s.scalar() == 0.5);
    t.backward(s);
    CHECK(x.grad[0] == 0.25);
}

TEST_CASE("shape mismatch is a configuration error") {
    Tape t;
    CHECK_THROWS_AS(ad::add(t.constant(Matrix(2, 2)), t.constant(Matrix(2, 3))), ConfigError);
    CHECK_THROWS_AS(ad::matmul(t.constant(Matrix(2, 2)), t.constant(Matrix(3, 2))), ConfigError);
}

TEST_CASE("non-finite intermediate names the op") {
    Tape t;
    try {
        ad::exp(t.constant(Matrix(1, 1, 1000.0)));
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.where() == "exp");
    }
}

TEST_CASE("every primitive matches central differences") {
    RngStream rng(2024, 0);
    const auto rm = [&](std::size_t r, std::size_t c) { return oracle::random_matrix(r, c, rng); };
    const auto pos = [&](std::size_t r, std::size_t c) {
        return oracle::random_matrix(r, c, rng, 0.2, 2.0);
    };
    using V = std::vector<Var>;
    check_op("matmul", {rm(3, 4), rm(4, 2)}, [](Tape&, V& v) { return ad::matmul(v[0], v[1]); });
    check_op("matmul_nt", {rm(3, 4), rm(2, 4)},
             [](Tape&, V& v) { return ad::matmul_nt(v[0], v[1]); });
    check_op("transpose", {rm(3, 2)}, [](Tape&, V& v) { return ad::transpose(v[0]); });
    check_op("add", {rm(2, 3), rm(2, 3)}, [](Tape&, V& v) { return ad::add(v[0], v[1]); });
    check_op("sub", {rm(2, 3), rm(2, 3)}, [](Tape&, V& v) { return ad::sub(v[0], v[1]); });
    check_op("mul", {rm(2, 3), rm(2, 3)}, [](Tape&, V& v) { return ad::mul(v[0], v[1]); });
    check_op("div", {rm(2, 3), pos(2, 3)}, [](Tape&, V& v) { return ad::div(v[0], v[1]); });
    check_op("add_row", {rm(3, 2), rm(1, 2)}, [](Tape&, V& v) { return ad::add_row(v[0], v[1]); });
    check_op("outer_add", {rm(3, 1), rm(1, 4)},
             [](Tape&, V& v) { return ad::outer_add(v[0], v[1]); });
    check_op("affine", {rm(2, 2)}, [](Tape&, V& v) { return ad::affine(v[0], -1.5, 0.3); });
    check_op("sigmoid", {rm(3, 3)}, [](Tape&, V& v) { return ad::sigmoid(v[0]); });
    check_op("softplus", {rm(3, 3)}, [](Tape&, V& v) { return ad::softplus(v[0]); });
    check_op("relu", {rm(3, 3)}, [](Tape&, V& v) { return ad::relu(v[0]); });
    check_op("leaky_relu", {rm(3, 3)}, [](Tape&, V& v) { return ad::leaky_relu(v[0], 0.2); });
    check_op("exp", {rm(3, 3)}, [](Tape&, V& v) { return ad::exp(v[0]); });
    check_op("log", {pos(3, 3)}, [](Tape&, V& v) { return ad::log(v[0]); });
    check_op("sqrt", {pos(3, 3)}, [](Tape&, V& v) { return ad::sqrt(v[0]); });
    check_op("square", {rm(3, 3)}, [](Tape&, V& v) { return ad::square(v[0]); });
    check_op("clamp", {Matrix{{-1.7, -0.3, 0.4}, {0.9, 1.6, 0.05}}},
             [](Tape&, V& v) { return ad::clamp(v[0], -0.5, 1.0); });
    check_op("precision_weight", {pos(3, 3)},
             [](Tape&, V& v) { return ad::precision_weight(v[0]); });
    check_op("sum", {rm(3, 3)}, [](Tape&, V& v) { return ad::sum(v[0]); });
    check_op("mean", {rm(3, 3)}, [](Tape&, V& v) { return ad::mean(v[0]); });
    check_op("concat_cols", {rm(3, 1), rm(3, 2)},
             [](Tape&, V& v) { return ad::concat_cols(v); });
    check_op("row_normalize", {rm(3, 4)}, [](Tape&, V& v) { return ad::row_normalize(v[0]); });
    const Matrix mask{{1, 0, 1, 1}, {0, 1, 0, 0}, {1, 1, 1, 1}};
    check_op("masked_row_softmax", {rm(3, 4)},
             [&](Tape&, V& v) { return ad::masked_row_softmax(v[0], mask); });
    const std::size_t idx[] = {2, 0, 0, 1};
    check_op("gather_rows", {rm(3, 2)}, [&](Tape&, V& v) { return ad::gather_rows(v[0], idx); });
}

TEST_CASE("random three-layer composition passes grad check") {
    RngStream rng(5, 5);
    Parameter w1("w1", oracle::random_matrix(4, 6, rng)), b1("b1", oracle::random_matrix(1, 6, rng));
    Parameter w2("w2", oracle::random_matrix(6, 5, rng)), w3("w3", oracle::random_matrix(5, 1, rng));
    const Matrix x = oracle::random_matrix(7, 4, rng);
    const LossFn loss = [&](Tape& t) {
        Var h = ad::sigmoid(ad::add_row(ad::matmul(t.constant(x), t.param(w1)), t.param(b1)));
        h = ad::softplus(ad::matmul(h, t.param(w2)));
        return ad::mean(ad::square(ad::matmul(h, t.param(w3))));
    };
    Parameter* ps[] = {&w1, &b1, &w2, &w3};
    const auto rep = grad_check(loss, ps, 1e-5, 1e-4);
    CHECK(rep.passed);
    CHECK(rep.max_rel_error < 1e-6);
}

TEST_CASE("masked softmax rows sum to one") {
    RngStream rng(8, 0);
    Tape t;
    Matrix mask(6, 6);
    for (double& m : mask.data()) m = rng.uniform() < 0.5 ? 1.0 : 0.0;
    for (std::size_t i = 0; i < 6; ++i) mask(i, i) = 1.0;
    const Matrix s = ad::masked_row_softmax(t.constant(oracle::random_matrix(6, 6, rng, -30, 30)),
                                            mask).value();
    for (std::size_t i = 0; i < 6; ++i) {
        double tot = 0;
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(s(i, j) >= 0.0);
            if (mask(i, j) == 0.0) CHECK(s(i, j) == 0.0);
            tot += s(i, j);
        }
        CHECK(std::abs(tot - 1.0) <= 1e-12);
    }
}

TEST_CASE("grad_check: quadratic is exact, corrupted gradient fails") {
    Parameter w("w", Matrix{{0.3, -1.2, 2.0}});
    const LossFn loss = [&](Tape& t) { return ad::sum(ad::square(t.param(w))); };
    Parameter* ps[] = {&w};
    const auto ok = grad_check(loss, ps, 1e-4, 1e-8);
    CHECK(ok.passed);
    CHECK(ok.max_rel_error < 1e-8);

    Matrix g{{0.6, -2.4, 4.0}};
    g[1] += 1.0;
    const Matrix grads[] = {g};
    const auto bad = compare_gradients(loss, ps, grads, 1e-5, 1e-4);
    CHECK_FALSE(bad.passed);
    REQUIRE(bad.failures.size() == 1);
    CHECK(bad.failures[0].index == 1);
}

TEST_CASE("grad_check flags a non-finite difference") {
    Parameter w("w", Matrix{{1e-6}});
    // log(w) with a floor far below the step: the minus side hits the floor
    // region and the analytic value cannot match.
    const LossFn loss = [&](Tape& t) { return ad::sum(ad::sqrt(t.param(w))); };
    Parameter* ps[] = {&w};
    const auto rep = grad_check(loss, ps, 1e-5, 1e-4);
    CHECK_FALSE(rep.passed);
}

TEST_CASE("sgd_step") {
    SUBCASE("zero gradient leaves values") {
        Parameter p("p", Matrix{{1.0, 2.0}});
        Parameter* ps[] = {&p};
        sgd_step(ps, 1.0);
        CHECK(p.value == Matrix{{1.0, 2.0}});
    }
    SUBCASE("one step") {
        Parameter p("p", Matrix{{1.0}});
        p.grad[0] = 0.5;
        Parameter* ps[] = {&p};
        sgd_step(ps, 1.0);
        CHECK(p.value[0] == 0.5);
        CHECK(p.grad[0] == 0.0);
    }
    SUBCASE("ten steps on w^2") {
        Parameter p("w", Matrix{{1.0}});
        Parameter* ps[] = {&p};
        for (int k = 0; k < 10; ++k) {
            Tape t;
            t.backward(ad::sum(ad::square(t.param(p))));
            sgd_step(ps, 0.1);
        }
        CHECK(p.value[0] == doctest::Approx(std::pow(0.8, 10)).epsilon(1e-12));
        CHECK(p.value[0] == doctest::Approx(0.1074).epsilon(1e-3));
    }
    SUBCASE("non-finite gradient aborts without touching values") {
        Parameter a("a", Matrix{{1.0}}), b("b", Matrix{{2.0}});
        a.grad[0] = 1.0;
        b.grad[0] = NAN;
        Parameter* ps[] = {&a, &b};
        try {
            sgd_step(ps, 1.0);
            FAIL("expected divergence");
        } catch (const DivergenceError& e) {
            CHECK(e.where() == "b");
        }
        CHECK(a.value[0] == 1.0);
    }
}

TEST_CASE("backward is deterministic") {
    RngStream rng(3, 3);
    Parameter w("w", oracle::random_matrix(5, 5, rng));
    const Matrix x = oracle::random_matrix(9, 5, rng);
    Matrix first;
    for (int run = 0; run < 2; ++run) {
        w.zero_grad();
        Tape t;
        t.backward(ad::mean(ad::softplus(ad::matmul(t.constant(x), t.param(w)))));
        if (run == 0) first = w.grad;
        else CHECK(w.grad == first);
    }
}
