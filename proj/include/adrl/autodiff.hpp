#pragma once

// Reverse-mode differentiation over dense matrices.
//
// A Tape records every op applied to Vars during one forward evaluation.
// Calling Tape::backward on a 1x1 Var propagates adjoints back through the
// record and accumulates them into each Parameter's gradient. Tapes are
// single-use: build, backward, discard.

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adrl/matrix.hpp"

namespace adrl {

class Parameter {
public:
    Parameter() = default;
    Parameter(std::string name, Matrix value)
        : value(std::move(value)), name_(std::move(name)) {
        grad = Matrix(this->value.rows(), this->value.cols());
    }

    const std::string& name() const noexcept { return name_; }
    void zero_grad() { grad.fill(0.0); }

    Matrix value;
    Matrix grad;

private:
    std::string name_;
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Matrix& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    /// Value of a 1x1 Var.
    double scalar() const;

    Tape* tape() const noexcept { return tape_; }
    std::size_t id() const noexcept { return id_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    Var param(Parameter& p);

    /// Records an op output. Throws DivergenceError naming `op` if `value`
    /// contains a non-finite entry.
    Var push(std::string op, Matrix value, std::vector<std::size_t> inputs, Backward backward);

    const Matrix& value(std::size_t id) const { return nodes_[id].value; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    /// Adjoint accumulator of a node, allocated on first use.
    Matrix& grad(std::size_t id);

    /// Seeds d(loss)/d(loss) = 1 and runs the reverse sweep. Parameter
    /// gradients are accumulated (+=), not overwritten.
    void backward(Var loss);

    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        std::string op;
        Matrix value;
        Matrix grad;
        std::vector<std::size_t> inputs;
        Backward backward;
        Parameter* param = nullptr;
        bool requires_grad = false;
    };
    std::deque<Node> nodes_;
};

/// Differentiable primitives. Shapes are checked eagerly; mismatches throw
/// ConfigError.
namespace ad {

Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);  // a * b^T
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);  // elementwise; b must be nonzero
Var add_row(Var a, Var row);               // a + 1 * row, row is 1 x cols
Var outer_add(Var col, Var row);           // out(i,j) = col(i) + row(j)
Var mul_const(Var a, const Matrix& c);     // elementwise by a constant
Var affine(Var a, double scale, double shift);
inline Var scale(Var a, double s) { return affine(a, s, 0.0); }
Var sigmoid(Var a);
Var softplus(Var a);
Var relu(Var a);
Var leaky_relu(Var a, double slope);
Var exp(Var a);
/// log(max(a, floor)); zero gradient where the floor is active.
Var log(Var a, double floor = 1e-12);
Var sqrt(Var a);
Var square(Var a);
/// Elementwise clamp to [lo, hi]; zero gradient outside.
Var clamp(Var a, double lo, double hi);
/// min(1, 1/a) elementwise; a must be positive.
Var precision_weight(Var a);
Var sum(Var a);
Var mean(Var a);
/// sum(a .* w) for a constant weight matrix.
Var weighted_sum(Var a, const Matrix& w);
Var concat_cols(std::span<const Var> parts);
/// Rows scaled to unit L2 norm; all-zero rows stay zero.
Var row_normalize(Var a);
/// Softmax of each row over entries where mask == 1; other entries are 0.
/// Rows with an empty mask are all zero.
Var masked_row_softmax(Var a, const Matrix& mask);
Var gather_rows(Var a, std::span<const std::size_t> idx);

}  // namespace ad

}  // namespace adrl
