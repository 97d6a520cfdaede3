#include "adrl/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "adrl/error.hpp"

namespace adrl {

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
    const Matrix& v = value();
    if (v.size() != 1) throw ConfigError("Var::scalar on non-scalar " + v.shape_string());
    return v[0];
}

Var Tape::constant(Matrix value) {
    if (!value.all_finite()) throw DivergenceError("constant", "constant input is not finite");
    Node n;
    n.op = "constant";
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
    if (!p.value.all_finite()) {
        throw DivergenceError(p.name(), "parameter " + p.name() + " is not finite");
    }
    Node n;
    n.op = "param:" + p.name();
    n.value = p.value;
    n.param = &p;
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::push(std::string op, Matrix value, std::vector<std::size_t> inputs, Backward backward) {
    if (!value.all_finite()) {
        throw DivergenceError(op, "non-finite output in op '" + op + "'");
    }
    Node n;
    n.op = std::move(op);
    n.value = std::move(value);
    n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                  [&](std::size_t i) { return nodes_[i].requires_grad; });
    n.inputs = std::move(inputs);
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Matrix& Tape::grad(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape() != this) throw ConfigError("backward: Var belongs to another tape");
    if (nodes_[loss.id()].value.size() != 1) {
        throw ConfigError("backward: loss must be 1x1, got " +
                          nodes_[loss.id()].value.shape_string());
    }
    grad(loss.id())[0] += 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || n.grad.empty()) continue;
        if (n.param != nullptr) {
            Matrix& pg = n.param->grad;
            for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad[k];
        } else if (n.backward) {
            n.backward(*this, n.grad);
        }
    }
}

namespace ad {

namespace {

void check_same(const char* op, const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ConfigError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                          b.shape_string());
    }
}

void accumulate(Tape& t, std::size_t id, const Matrix& g) {
    if (!t.requires_grad(id)) return;
    Matrix& dst = t.grad(id);
    for (std::size_t k = 0; k < g.size(); ++k) dst[k] += g[k];
}

template <class F, class D>
Var unary(const char* op, Var a, F f, D dfdx_given_x_y) {
    Tape& t = *a.tape();
    const Matrix& x = a.value();
    Matrix y(x.rows(), x.cols());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = f(x[k]);
    const std::size_t ia = a.id();
    const std::size_t out = t.size();
    return t.push(op, std::move(y), {ia}, [ia, out, dfdx_given_x_y](Tape& tp, const Matrix& g) {
        if (!tp.requires_grad(ia)) return;
        const Matrix& xv = tp.value(ia);
        const Matrix& yv = tp.value(out);
        Matrix& ga = tp.grad(ia);
        for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * dfdx_given_x_y(xv[k], yv[k]);
    });
}

double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double stable_softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

Var matmul(Var a, Var b) {
    Tape& t = *a.tape();
    const std::size_t ia = a.id(), ib = b.id();
    return t.push("matmul", adrl::matmul(a.value(), b.value()), {ia, ib},
                  [ia, ib](Tape& tp, const Matrix& g) {
                      if (tp.requires_grad(ia)) accumulate(tp, ia, matmul_nt(g, tp.value(ib)));
                      if (tp.requires_grad(ib)) accumulate(tp, ib, matmul_tn(tp.value(ia), g));
                  });
}

Var matmul_nt(Var a, Var b) {
    Tape& t = *a.tape();
    const std::size_t ia = a.id(), ib = b.id();
    return t.push("matmul_nt", adrl::matmul_nt(a.value(), b.value()), {ia, ib},
                  [ia, ib](Tape& tp, const Matrix& g) {
                      if (tp.requires_grad(ia)) accumulate(tp, ia, adrl::matmul(g, tp.value(ib)));
                      if (tp.requires_grad(ib)) accumulate(tp, ib, matmul_tn(g, tp.value(ia)));
                  });
}

Var transpose(Var a) {
    Tape& t = *a.tape();
    const std::size_t ia = a.id();
    return t.push("transpose", a.value().transposed(), {ia}, [ia](Tape& tp, const Matrix& g) {
        accumulate(tp, ia, g.transposed());
    });
}

Var add(Var a, Var b) {
    check_same("add", a.value(), b.value());
    Tape& t = *a.tape();
    Matrix y = a.value();
    const Matrix& bv = b.value();
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += bv[k];
    const std::size_t ia = a.id(), ib = b.id();
    return t.push("add", std::move(y), {ia, ib}, [ia, ib](Tape& tp, const Matrix& g) {
        accumulate(tp, ia, g);
        accumulate(tp, ib, g);
    });
}

Var sub(Var a, Var b) {
    check_same("sub", a.value(), b.value());
    Tape& t = *a.tape();
    Matrix y = a.value();
    const Matrix& bv = b.value();
    for (std::size_t k = 0; k < y.size(); ++k) y[k] -= bv[k];
    const std::size_t ia = a.id(), ib = b.id();
    return t.push("sub", std::move(y), {ia, ib}, [ia, ib](Tape& tp, const Matrix& g) {
        accumulate(tp, ia, g);
        if (!tp.requires_grad(ib)) return;
        Matrix& gb = tp.grad(ib);
        for (std::size_t k = 0; k < g.size(); ++k) gb[k] -= g[k];
    });
}

Var mul(Var a, Var b) {
    check_same("mul", a.value(), b.value());
    Tape& t = *a.tape();
    Matrix y = a.value();
    const Matrix& bv = b.value();
    for (std::size_t k = 0; k < y.size(); ++k) y[k] *= bv[k];
    const std::size_t ia = a.id(), ib = b.id();
    return t.push("mul", std::move(y), {ia, ib}, [ia, ib](Tape& tp, const Matrix& g) {
        if (tp.requires_grad(ia)) {
            const Matrix& bv = tp.value(ib);
            Matrix& ga = tp.grad(ia);
            for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * bv[k];
        }
        if (tp.requires_grad(ib)) {
            const Matrix& av = tp.value(ia);
            Matrix& gb = tp.grad(ib);
            for (std::size_t k = 0; k < g.size(); ++k) gb[k] += g[k] * av[k];
        }
    });
}

Var div(Var a, Var b) {
    check_same("div", a.value(), b.value());
    Tape& t = *a.tape();
    Matrix y = a.value();
    const Matrix& bv = b.value();
    for (std::size_t k = 0; k < y.size(); ++k) y[k] /= bv[k];
    const std::size_t ia = a.id(), ib = b.id();
    const std::size_t out = t.size();
    return t.push("div", std::move(y), {ia, ib}, [ia, ib, out](Tape& tp, const Matrix& g) {
        const Matrix& bv = tp.value(ib);
        if (tp.requires_grad(ia)) {
            Matrix& ga = tp.grad(ia);
            for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] / bv[k];
        }
        if (tp.requires_grad(ib)) {
            const Matrix& yv = tp.value(out);
            Matrix& gb = tp.grad(ib);
            for (std::size_t k = 0; k < g.size(); ++k) gb[k] -= g[k] * yv[k] / bv[k];
        }
    });
}

Var add_row(Var a, Var row) {
    const Matrix& av = a.value();
    const Matrix& rv = row.value();
    if (rv.rows() != 1 || rv.cols() != av.cols()) {
        throw ConfigError("add_row: expected (1x" + std::to_string(av.cols()) + ") row, got " +
                          rv.shape_string());
    }
    Tape& t = *a.tape();
    Matrix y = av;
    for (std::size_t r = 0; r < y.rows(); ++r)
        for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += rv[c];
    const std::size_t ia = a.id(), ir = row.id();
    return t.push("add_row", std::move(y), {ia, ir}, [ia, ir](Tape& tp, const Matrix& g) {
        accumulate(tp, ia, g);
        if (!tp.requires_grad(ir)) return;
        Matrix& gr = tp.grad(ir);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < g.cols(); ++c) gr[c] += g(r, c);
    });
}

Var outer_add(Var col, Var row) {
    const Matrix& cv = col.value();
    const Matrix& rv = row.value();
    if (cv.cols() != 1 || rv.rows() != 1) {
        throw ConfigError("outer_add: expected column and row, got " + cv.shape_string() + " and " +
                          rv.shape_string());
    }
    Tape& t = *col.tape();
    Matrix y(cv.rows(), rv.cols());
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) = cv[i] + rv[j];
    const std::size_t ic = col.id(), ir = row.id();
    return t.push("outer_add", std::move(y), {ic, ir}, [ic, ir](Tape& tp, const Matrix& g) {
        if (tp.requires_grad(ic)) {
            Matrix& gc = tp.grad(ic);
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) gc[i] += g(i, j);
        }
        if (tp.requires_grad(ir)) {
            Matrix& gr = tp.grad(ir);
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) gr[j] += g(i, j);
        }
    });
}

Var mul_const(Var a, const Matrix& c) {
    check_same("mul_const", a.value(), c);
    Tape& t = *a.tape();
    Matrix y = a.value();
    for (std::size_t k = 0; k < y.size(); ++k) y[k] *= c[k];
    const std::size_t ia = a.id();
    return t.push("mul_const", std::move(y), {ia}, [ia, c](Tape& tp, const Matrix& g) {
        if (!tp.requires_grad(ia)) return;
        Matrix& ga = tp.grad(ia);
        for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * c[k];
    });
}

Var affine(Var a, double s, double shift) {
    return unary("affine", a, [s, shift](double x) { return s * x + shift; },
                 [s](double, double) { return s; });
}

Var sigmoid(Var a) {
    return unary("sigmoid", a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var softplus(Var a) {
    return unary("softplus", a, stable_softplus,
                 [](double x, double) { return stable_sigmoid(x); });
}

Var relu(Var a) {
    return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var a, double slope) {
    return unary("leaky_relu", a, [slope](double x) { return x > 0.0 ? x : slope * x; },
                 [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var exp(Var a) {
    return unary("exp", a, [](double x) { return std::exp(x); },
                 [](double, double y) { return y; });
}

Var log(Var a, double floor) {
    return unary("log", a, [floor](double x) { return std::log(std::max(x, floor)); },
                 [floor](double x, double) { return x > floor ? 1.0 / x : 0.0; });
}

Var sqrt(Var a) {
    return unary("sqrt", a, [](double x) { return std::sqrt(x); },
                 [](double, double y) { return 0.5 / y; });
}

Var square(Var a) {
    return unary("square", a, [](double x) { return x * x; },
                 [](double x, double) { return 2.0 * x; });
}

Var clamp(Var a, double lo, double hi) {
    return unary("clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
                 [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var precision_weight(Var a) {
    return unary("precision_weight", a, [](double x) { return x > 1.0 ? 1.0 / x : 1.0; },
                 [](double x, double) { return x > 1.0 ? -1.0 / (x * x) : 0.0; });
}

Var sum(Var a) {
    Tape& t = *a.tape();
    const std::size_t ia = a.id();
    return t.push("sum", Matrix(1, 1, a.value().sum()), {ia}, [ia](Tape& tp, const Matrix& g) {
        if (!tp.requires_grad(ia)) return;
        Matrix& ga = tp.grad(ia);
        for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += g[0];
    });
}

Var mean(Var a) {
    const double n = static_cast<double>(a.value().size());
    if (n == 0) throw ConfigError("mean: empty input");
    Tape& t = *a.tape();
    const std::size_t ia = a.id();
    return t.push("mean", Matrix(1, 1, a.value().sum() / n), {ia},
                  [ia, n](Tape& tp, const Matrix& g) {
                      if (!tp.requires_grad(ia)) return;
                      Matrix& ga = tp.grad(ia);
                      for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += g[0] / n;
                  });
}

Var weighted_sum(Var a, const Matrix& w) {
    check_same("weighted_sum", a.value(), w);
    const Matrix& av = a.value();
    double s = 0.0;
    for (std::size_t k = 0; k < av.size(); ++k) s += av[k] * w[k];
    Tape& t = *a.tape();
    const std::size_t ia = a.id();
    return t.push("weighted_sum", Matrix(1, 1, s), {ia}, [ia, w](Tape& tp, const Matrix& g) {
        if (!tp.requires_grad(ia)) return;
        Matrix& ga = tp.grad(ia);
        for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += g[0] * w[k];
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ConfigError("concat_cols: no inputs");
    Tape& t = *parts.front().tape();
    const std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    std::vector<std::size_t> ids, widths;
    for (const Var& p : parts) {
        if (p.rows() != rows) {
            throw ConfigError("concat_cols: row mismatch " + p.value().shape_string());
        }
        ids.push_back(p.id());
        widths.push_back(p.cols());
        cols += p.cols();
    }
    Matrix y(rows, cols);
    std::size_t off = 0;
    for (const Var& p : parts) {
        const Matrix& v = p.value();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < v.cols(); ++c) y(r, off + c) = v(r, c);
        off += v.cols();
    }
    return t.push("concat_cols", std::move(y), ids, [ids, widths](Tape& tp, const Matrix& g) {
        std::size_t o = 0;
        for (std::size_t p = 0; p < ids.size(); ++p) {
            if (tp.requires_grad(ids[p])) {
                Matrix& gp = tp.grad(ids[p]);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < widths[p]; ++c) gp(r, c) += g(r, o + c);
            }
            o += widths[p];
        }
    });
}

Var row_normalize(Var a) {
    Tape& t = *a.tape();
    const Matrix& x = a.value();
    Matrix y(x.rows(), x.cols());
    std::vector<double> norms(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double s = 0.0;
        for (double v : x.row(r)) s += v * v;
        norms[r] = std::sqrt(s);
        if (norms[r] > 0.0)
            for (std::size_t c = 0; c < x.cols(); ++c) y(r, c) = x(r, c) / norms[r];
    }
    const std::size_t ia = a.id();
    const std::size_t out = t.size();
    return t.push("row_normalize", std::move(y), {ia},
                  [ia, out, norms](Tape& tp, const Matrix& g) {
                      if (!tp.requires_grad(ia)) return;
                      const Matrix& yv = tp.value(out);
                      Matrix& ga = tp.grad(ia);
                      for (std::size_t r = 0; r < g.rows(); ++r) {
                          if (norms[r] == 0.0) continue;
                          double dot = 0.0;
                          for (std::size_t c = 0; c < g.cols(); ++c) dot += yv(r, c) * g(r, c);
                          for (std::size_t c = 0; c < g.cols(); ++c)
                              ga(r, c) += (g(r, c) - yv(r, c) * dot) / norms[r];
                      }
                  });
}

Var masked_row_softmax(Var a, const Matrix& mask) {
    check_same("masked_row_softmax", a.value(), mask);
    Tape& t = *a.tape();
    const Matrix& x = a.value();
    Matrix y(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double mx = -INFINITY;
        for (std::size_t c = 0; c < x.cols(); ++c)
            if (mask(r, c) != 0.0) mx = std::max(mx, x(r, c));
        if (mx == -INFINITY) continue;
        double z = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) {
            if (mask(r, c) == 0.0) continue;
            y(r, c) = std::exp(x(r, c) - mx);
            z += y(r, c);
        }
        for (std::size_t c = 0; c < x.cols(); ++c) y(r, c) /= z;
    }
    const std::size_t ia = a.id();
    const std::size_t out = t.size();
    return t.push("masked_row_softmax", std::move(y), {ia}, [ia, out](Tape& tp, const Matrix& g) {
        if (!tp.requires_grad(ia)) return;
        const Matrix& yv = tp.value(out);
        Matrix& ga = tp.grad(ia);
        for (std::size_t r = 0; r < g.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < g.cols(); ++c) dot += yv(r, c) * g(r, c);
            for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) += yv(r, c) * (g(r, c) - dot);
        }
    });
}

Var gather_rows(Var a, std::span<const std::size_t> idx) {
    Tape& t = *a.tape();
    std::vector<std::size_t> rows(idx.begin(), idx.end());
    const std::size_t ia = a.id();
    return t.push("gather_rows", a.value().select_rows(rows), {ia},
                  [ia, rows](Tape& tp, const Matrix& g) {
                      if (!tp.requires_grad(ia)) return;
                      Matrix& ga = tp.grad(ia);
                      for (std::size_t i = 0; i < rows.size(); ++i)
                          for (std::size_t c = 0; c < g.cols(); ++c) ga(rows[i], c) += g(i, c);
                  });
}

}  // namespace ad

}  // namespace adrl
