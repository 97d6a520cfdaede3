#include "adrl/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/Dense>

#include "adrl/error.hpp"
#include "adrl/optim.hpp"

namespace adrl {

std::vector<Matrix> label_specific_features(const Matrix& l, const Matrix& z) {
    if (l.cols() != z.cols()) throw ConfigError("label_specific_features: dim mismatch");
    std::vector<Matrix> out;
    out.reserve(l.rows());
    for (std::size_t c = 0; c < l.rows(); ++c) {
        Matrix f(z.rows(), z.cols());
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (std::size_t k = 0; k < z.cols(); ++k)
                f(i, k) = z(i, k) / (1.0 + std::exp(-l(c, k)));
        out.push_back(std::move(f));
    }
    return out;
}

ClassHeads::ClassHeads(const std::string& name, std::size_t num_labels, std::size_t dim,
                       RngStream& rng)
    : weight(name + ".weight", init_uniform(num_labels, dim, dim, rng)),
      bias(name + ".bias", init_uniform(1, num_labels, dim, rng)) {}

void ClassHeads::collect(std::vector<Parameter*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

Var pseudo_predict(Tape& tape, ClassHeads& heads, Var label_emb, Var z) {
    const Var gated = ad::mul(ad::sigmoid(label_emb), tape.param(heads.weight));
    const Var logits = ad::add_row(ad::matmul_nt(z, gated), tape.param(heads.bias));
    return ad::clamp(ad::sigmoid(logits), kProbClamp, 1.0 - kProbClamp);
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const Matrix& m) {
    return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
            static_cast<Eigen::Index>(m.cols())};
}

/// Lower triangle of A A^T.
Eigen::MatrixXd gram_lower(const Matrix& a) {
    const auto n = static_cast<Eigen::Index>(a.rows());
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    g.selfadjointView<Eigen::Lower>().rankUpdate(view(a));
    return g;
}

}  // namespace

// The N x N similarity matrices never go on the tape: the forward pass keeps
// only the per-pair derivative coefficients, and each unordered pair is
// evaluated once since S and T are symmetric.
Var manifold_loss(Tape& tape, Var zn, Var pn) {
    const std::size_t n = zn.rows();
    if (pn.rows() != n) throw ConfigError("manifold_loss: row mismatch");
    if (n < 2) return tape.constant(Matrix(1, 1));
    const double w = -1.0 / static_cast<double>(n * (n - 1));
    const Eigen::MatrixXd zz = gram_lower(zn.value());
    const Eigen::MatrixXd pp = gram_lower(pn.value());

    // dz(i,j) = dL/d(z_i.z_j), dp(i,j) = dL/d(p_i.p_j), both per ordered pair.
    auto dz = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(n, n));
    auto dp = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(n, n));
    double total = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
        for (Eigen::Index i = j + 1; i < static_cast<Eigen::Index>(n); ++i) {
            const double s = 0.5 + 0.5 * zz(i, j);
            const double raw_t = pp(i, j);
            const double t = std::clamp(raw_t, 0.0, 1.0);
            const double log_s = std::log(std::max(s, 1e-12));
            const double log_1s = std::log(std::max(1.0 - s, 1e-12));
            total += t * log_s + (1.0 - t) * log_1s;
            const double ds = (s > 1e-12 ? t / s : 0.0) -
                              (1.0 - s > 1e-12 ? (1.0 - t) / (1.0 - s) : 0.0);
            (*dz)(i, j) = 0.5 * w * ds;
            if (raw_t > 0.0 && raw_t < 1.0) (*dp)(i, j) = w * (log_s - log_1s);
        }
    }
    const std::size_t iz = zn.id(), ip = pn.id();
    return tape.push("manifold_loss", Matrix(1, 1, 2.0 * w * total), {iz, ip},
                     [iz, ip, dz, dp](Tape& tp, const Matrix& g) {
                         // Each ordered pair (i,j) and (j,i) contributes, so
                         // the pullback of A A^T is 2 D A with D symmetric.
                         const auto pull = [&](std::size_t id, const Eigen::MatrixXd& d) {
                             if (!tp.requires_grad(id)) return;
                             const Matrix& a = tp.value(id);
                             const RowMajor ga =
                                 (2.0 * g[0]) * (d.selfadjointView<Eigen::Lower>() * view(a));
                             Matrix& acc = tp.grad(id);
                             for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += ga.data()[k];
                         };
                         pull(iz, *dz);
                         pull(ip, *dp);
                     });
}

std::vector<double> fusion_weights(std::span<const double> losses) {
    if (losses.empty()) throw ConfigError("fusion_weights: no views");
    std::vector<double> w(losses.size());
    double total = 0.0;
    for (std::size_t v = 0; v < losses.size(); ++v) {
        w[v] = 1.0 / std::max(losses[v], kFusionLossFloor);
        total += w[v];
    }
    for (double& x : w) x /= total;
    return w;
}

Var fuse_channel(std::span<const Var> reps, std::span<const double> losses) {
    if (reps.size() != losses.size()) throw ConfigError("fuse_channel: one loss per view");
    const std::vector<double> w = fusion_weights(losses);
    Var out;
    for (std::size_t v = 0; v < reps.size(); ++v) {
        const Var term = ad::scale(reps[v], w[v]);
        out = out.valid() ? ad::add(out, term) : term;
    }
    return out;
}

Var gate_fuse(Var shared, Var priv) { return ad::mul(ad::sigmoid(priv), shared); }

Var masked_ce(Tape& tape, Var p, const Matrix& y, const Matrix& g) {
    if (!p.value().same_shape(y) || !y.same_shape(g)) {
        throw ConfigError("masked_ce: shape mismatch " + p.value().shape_string() + ", " +
                          y.shape_string() + ", " + g.shape_string());
    }
    const double denom = g.sum();
    if (denom == 0.0) return tape.constant(Matrix(1, 1));
    Matrix wpos(y.rows(), y.cols()), wneg(y.rows(), y.cols());
    for (std::size_t k = 0; k < y.size(); ++k) {
        wpos[k] = -g[k] * y[k] / denom;
        wneg[k] = -g[k] * (1.0 - y[k]) / denom;
    }
    return ad::add(ad::weighted_sum(ad::log(p), wpos),
                   ad::weighted_sum(ad::log(ad::affine(p, -1.0, 1.0)), wneg));
}

Var total_loss(Tape& tape, const LossComponents& parts, const LossWeights& w) {
    Var total = tape.constant(Matrix(1, 1));
    const auto add = [&](const Var& term, double coef) {
        if (term.valid() && coef != 0.0) total = ad::add(total, ad::scale(term, coef));
    };
    add(parts.mce, w.alpha);
    add(parts.re, w.lambda1);
    add(parts.pmce, w.lambda2);
    add(parts.gc, 1.0);
    add(parts.dis, 1.0);
    return total;
}

}  // namespace adrl
