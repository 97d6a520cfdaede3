#include "adrl/optim.hpp"

#include <algorithm>
#include <cmath>

#include "adrl/error.hpp"

namespace adrl {

Matrix init_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, RngStream& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-bound, bound);
    return m;
}

void zero_grads(std::span<Parameter* const> params) {
    for (Parameter* p : params) p->zero_grad();
}

void sgd_step(std::span<Parameter* const> params, double learning_rate) {
    for (const Parameter* p : params) {
        if (!p->grad.all_finite()) {
            throw DivergenceError(p->name(), "non-finite gradient in parameter " + p->name());
        }
    }
    for (Parameter* p : params) {
        for (std::size_t k = 0; k < p->value.size(); ++k)
            p->value[k] -= learning_rate * p->grad[k];
        p->zero_grad();
    }
}

namespace {

double eval_loss(const LossFn& loss) {
    Tape tape;
    return loss(tape).scalar();
}

}  // namespace

GradCheckReport compare_gradients(const LossFn& loss, std::span<Parameter* const> params,
                                  std::span<const Matrix> analytic, double step, double tolerance) {
    if (step <= 0.0) throw ConfigError("grad_check: step must be > 0");
    if (analytic.size() != params.size()) {
        throw ConfigError("grad_check: one analytic gradient per parameter required");
    }
    GradCheckReport report;
    report.tolerance = tolerance;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Parameter& param = *params[p];
        if (!analytic[p].same_shape(param.value)) {
            throw ConfigError("grad_check: gradient shape mismatch for " + param.name());
        }
        ParameterCheck check;
        check.name = param.name();
        check.entries = param.value.size();
        check.worst.parameter = param.name();
        for (std::size_t k = 0; k < param.value.size(); ++k) {
            const double orig = param.value[k];
            double plus = NAN, minus = NAN;
            try {
                param.value[k] = orig + step;
                plus = eval_loss(loss);
                param.value[k] = orig - step;
                minus = eval_loss(loss);
            } catch (const DivergenceError&) {
                // leave NaN; flagged below
            }
            param.value[k] = orig;

            GradCheckEntry e;
            e.parameter = param.name();
            e.index = k;
            e.analytic = analytic[p][k];
            e.numeric = (plus - minus) / (2.0 * step);
            e.finite = std::isfinite(e.numeric) && std::isfinite(e.analytic);
            e.rel_error = e.finite ? std::abs(e.analytic - e.numeric) /
                                         std::max(1.0, std::abs(e.numeric))
                                   : INFINITY;
            const bool ok = e.finite && e.rel_error <= tolerance;
            if (!ok) {
                ++check.failures;
                report.failures.push_back(e);
                report.passed = false;
            }
            if (k == 0 || !(e.rel_error <= check.worst.rel_error)) check.worst = e;
            report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
        }
        report.parameters.push_back(std::move(check));
    }
    return report;
}

GradCheckReport grad_check(const LossFn& loss, std::span<Parameter* const> params, double step,
                           double tolerance) {
    zero_grads(params);
    {
        Tape tape;
        Var l = loss(tape);
        tape.backward(l);
    }
    std::vector<Matrix> analytic;
    analytic.reserve(params.size());
    for (const Parameter* p : params) analytic.push_back(p->grad);
    zero_grads(params);
    return compare_gradients(loss, params, analytic, step, tolerance);
}

}  // namespace adrl
