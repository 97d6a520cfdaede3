#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adrl/autodiff.hpp"
#include "adrl/rng.hpp"

namespace adrl {

/// Matrix with entries uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Matrix init_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, RngStream& rng);

/// value <- value - lr * grad, then grad <- 0. Throws DivergenceError naming
/// the first parameter with a non-finite gradient; no parameter is modified in
/// that case.
void sgd_step(std::span<Parameter* const> params, double learning_rate);

void zero_grads(std::span<Parameter* const> params);

/// Builds the loss on a fresh tape. Must be deterministic across calls.
using LossFn = std::function<Var(Tape&)>;

struct GradCheckEntry {
    std::string parameter;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
    bool finite = true;
};

struct ParameterCheck {
    std::string name;
    std::size_t entries = 0;
    GradCheckEntry worst;
    std::size_t failures = 0;
};

struct GradCheckReport {
    std::vector<ParameterCheck> parameters;
    std::vector<GradCheckEntry> failures;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = true;
};

/// Compares `analytic` (one matrix per parameter) against central differences
/// of `loss`. rel_error = |analytic - numeric| / max(1, |numeric|). A
/// non-finite difference is reported as a failure.
GradCheckReport compare_gradients(const LossFn& loss, std::span<Parameter* const> params,
                                  std::span<const Matrix> analytic, double step, double tolerance);

/// Runs one backward pass for the analytic gradients, then compare_gradients.
/// Parameter gradients are left zeroed afterwards.
GradCheckReport grad_check(const LossFn& loss, std::span<Parameter* const> params, double step,
                           double tolerance);

}  // namespace adrl
