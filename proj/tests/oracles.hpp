#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They follow the defining formulas literally (full sorts, explicit
// pair loops) and share no code with the library beyond Matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "adrl/matrix.hpp"
#include "adrl/rng.hpp"

namespace oracle {

using adrl::Matrix;

inline Matrix random_matrix(std::size_t r, std::size_t c, adrl::RngStream& rng, double lo = -2.0,
                            double hi = 2.0) {
    Matrix m(r, c);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

// ---- imputation ---------------------------------------------------------

// <h(x_i), h(x_j)> with h the unit-norm row (zero rows stay zero).
inline double cosine(const Matrix& x, std::size_t i, std::size_t j) {
    double ni = 0.0, nj = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
        ni += x(i, c) * x(i, c);
        nj += x(j, c) * x(j, c);
    }
    if (ni == 0.0 || nj == 0.0) return 0.0;
    const double si = 1.0 / std::sqrt(ni), sj = 1.0 / std::sqrt(nj);
    double dot = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) dot += (x(i, c) * si) * (x(j, c) * sj);
    return dot;
}

inline Matrix attention(const Matrix& x, double tau) {
    Matrix a(x.rows(), x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.rows(); ++j) a(i, j) = std::exp(cosine(x, i, j) / tau);
    return a;
}

/// Threshold = q-th smallest off-diagonal value, q = floor(p (N-1) / 100);
/// q = 0 means no threshold.
inline Matrix filter(const Matrix& a, double p) {
    const std::size_t n = a.rows();
    Matrix out(n, n);
    if (n < 2) return out;
    const auto q = static_cast<std::size_t>(std::floor(p * static_cast<double>(n - 1) / 100.0));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> off;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) off.push_back(a(i, j));
        std::sort(off.begin(), off.end());
        const double t = q == 0 ? -std::numeric_limits<double>::infinity() : off[q - 1];
        for (std::size_t j = 0; j < n; ++j) out(i, j) = (j != i && a(i, j) > t) ? a(i, j) : 0.0;
    }
    return out;
}

inline Matrix affinity(const std::vector<Matrix>& filtered, const Matrix& w, std::size_t v) {
    const std::size_t n = w.rows();
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double num = 0.0, den = 0.0;
            for (std::size_t k = 0; k < filtered.size(); ++k) {
                if (k == v) continue;
                num += w(i, k) * w(j, k) * filtered[k](i, j);
                den += w(i, k) * w(j, k);
            }
            b(i, j) = den == 0.0 ? 0.0 : num / den;
        }
    }
    return b;
}

inline Matrix topk(const Matrix& b, const Matrix& w, std::size_t v, std::size_t k) {
    const std::size_t n = b.rows();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> cand;
        for (std::size_t j = 0; j < n; ++j)
            if (w(j, v) == 1.0 && b(i, j) > 0.0) cand.push_back(j);
        std::stable_sort(cand.begin(), cand.end(),
                         [&](std::size_t x, std::size_t y) { return b(i, x) > b(i, y); });
        for (std::size_t t = 0; t < cand.size() && t < k; ++t) out(i, cand[t]) = 1.0;
    }
    return out;
}

inline Matrix impute(const Matrix& x, const Matrix& kk, const Matrix& b, const Matrix& w,
                     std::size_t v) {
    const std::size_t n = x.rows(), d = x.cols();
    Matrix out(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        double den = 0.0;
        for (std::size_t j = 0; j < n; ++j) den += kk(i, j) * b(i, j);
        for (std::size_t c = 0; c < d; ++c) {
            if (den > 0.0) {
                double num = 0.0;
                for (std::size_t j = 0; j < n; ++j) num += kk(i, j) * b(i, j) * x(j, c);
                out(i, c) = num / den;
            } else {
                double s = 0.0, cnt = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (w(j, v) == 1.0) s += x(j, c), cnt += 1.0;
                out(i, c) = s / cnt;
            }
        }
    }
    return out;
}

inline std::vector<Matrix> complete(const std::vector<Matrix>& views, const Matrix& w, double tau,
                                    double p, std::size_t k) {
    std::vector<Matrix> filtered;
    for (const Matrix& x : views) filtered.push_back(filter(attention(x, tau), p));
    std::vector<Matrix> out;
    for (std::size_t v = 0; v < views.size(); ++v) {
        const Matrix b = affinity(filtered, w, v);
        const Matrix imp = impute(views[v], topk(b, w, v, k), b, w, v);
        Matrix z = views[v];
        for (std::size_t i = 0; i < z.rows(); ++i)
            if (w(i, v) != 1.0)
                for (std::size_t c = 0; c < z.cols(); ++c) z(i, c) = imp(i, c);
        out.push_back(std::move(z));
    }
    return out;
}

// ---- metrics ------------------------------------------------------------

struct Metrics {
    double ap = 0, hl = 0, rl = 0, auc = 0, oe = 0, cov = 0;
};

/// 1-based rank of label j in sample i: labels with a higher score, or an
/// equal score and smaller index, come first.
inline std::size_t rank_of(const Matrix& s, std::size_t i, std::size_t j) {
    std::size_t r = 1;
    for (std::size_t k = 0; k < s.cols(); ++k)
        if (s(i, k) > s(i, j) || (s(i, k) == s(i, j) && k < j)) ++r;
    return r;
}

inline Metrics metrics(const Matrix& s, const Matrix& y) {
    const std::size_t n = s.rows(), c = s.cols();
    Metrics m;
    double wrong = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) wrong += ((s(i, j) >= 0.5) != (y(i, j) == 1.0)) ? 1 : 0;
    m.hl = wrong / static_cast<double>(n * c);

    double ranked = 0, rl_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> rel, irr;
        for (std::size_t j = 0; j < c; ++j) (y(i, j) == 1.0 ? rel : irr).push_back(j);
        if (rel.empty()) continue;
        ranked += 1;
        double ap = 0;
        std::size_t maxr = 0;
        for (std::size_t p : rel) {
            const std::size_t rp = rank_of(s, i, p);
            maxr = std::max(maxr, rp);
            double above = 0;
            for (std::size_t q : rel) above += rank_of(s, i, q) <= rp ? 1 : 0;
            ap += above / static_cast<double>(rp);
        }
        m.ap += ap / static_cast<double>(rel.size());
        m.cov += static_cast<double>(maxr - 1) / static_cast<double>(c);
        for (std::size_t j = 0; j < c; ++j)
            if (rank_of(s, i, j) == 1) m.oe += y(i, j) == 1.0 ? 0 : 1;
        if (!irr.empty()) {
            double bad = 0;
            for (std::size_t p : rel)
                for (std::size_t q : irr) bad += s(i, p) < s(i, q) ? 1 : s(i, p) == s(i, q) ? 0.5 : 0;
            m.rl += bad / static_cast<double>(rel.size() * irr.size());
            rl_n += 1;
        }
    }
    if (ranked > 0) m.ap /= ranked, m.cov /= ranked, m.oe /= ranked;
    if (rl_n > 0) m.rl /= rl_n;

    double labels = 0;
    for (std::size_t j = 0; j < c; ++j) {
        double good = 0, pairs = 0;
        for (std::size_t a = 0; a < n; ++a) {
            if (y(a, j) != 1.0) continue;
            for (std::size_t b = 0; b < n; ++b) {
                if (y(b, j) == 1.0) continue;
                pairs += 1;
                good += s(a, j) > s(b, j) ? 1 : s(a, j) == s(b, j) ? 0.5 : 0;
            }
        }
        if (pairs == 0) continue;
        m.auc += good / pairs;
        labels += 1;
    }
    if (labels > 0) m.auc /= labels;
    return m;
}

// ---- label graph --------------------------------------------------------

inline Matrix cooccurrence(const Matrix& y, const Matrix& g, const std::vector<std::size_t>& rows) {
    const std::size_t c = y.cols();
    Matrix q(c, c);
    for (std::size_t i = 0; i < c; ++i) {
        double den = 0;
        for (std::size_t k : rows) den += (y(k, i) == 1.0 && g(k, i) == 1.0) ? 1 : 0;
        for (std::size_t j = 0; j < c; ++j) {
            double num = 0;
            for (std::size_t k : rows)
                num += (y(k, i) == 1.0 && g(k, i) == 1.0 && y(k, j) == 1.0 && g(k, j) == 1.0) ? 1 : 0;
            q(i, j) = den == 0 ? 0.0 : num / den;
        }
    }
    return q;
}

inline double leaky(double x, double slope) { return x > 0 ? x : slope * x; }

/// Row-vector convention: projections are z_i W. `attn` is d x 2 (column 0
/// scores the centre node, column 1 the neighbor). Returns refined rows and
/// fills `alpha`.
inline Matrix gat(const Matrix& z, const Matrix& q, const Matrix& attn, const Matrix& wbar,
                  const std::vector<Matrix>& heads, double slope, Matrix* alpha_out = nullptr) {
    const std::size_t c = z.rows(), d = z.cols();
    auto project = [&](const Matrix& w, std::size_t i, std::size_t col) {
        double s = 0;
        for (std::size_t k = 0; k < d; ++k) s += z(i, k) * w(k, col);
        return s;
    };
    Matrix alpha(c, c);
    for (std::size_t i = 0; i < c; ++i) {
        std::vector<std::size_t> nb;
        for (std::size_t j = 0; j < c; ++j)
            if (j == i || q(i, j) > 0.0) nb.push_back(j);
        std::vector<double> e;
        for (std::size_t j : nb) {
            double s = 0;
            for (std::size_t k = 0; k < d; ++k)
                s += attn(k, 0) * project(wbar, i, k) + attn(k, 1) * project(wbar, j, k);
            e.push_back(leaky(s, slope));
        }
        const double mx = *std::max_element(e.begin(), e.end());
        double tot = 0;
        for (double& v : e) tot += (v = std::exp(v - mx));
        for (std::size_t t = 0; t < nb.size(); ++t) alpha(i, nb[t]) = e[t] / tot;
    }
    Matrix out(c, d);
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t col = 0; col < d; ++col) {
            double acc = 0;
            for (const Matrix& w : heads)
                for (std::size_t j = 0; j < c; ++j) acc += alpha(i, j) * project(w, j, col);
            out(i, col) = leaky(acc / static_cast<double>(heads.size()), slope);
        }
    }
    if (alpha_out != nullptr) *alpha_out = alpha;
    return out;
}

}  // namespace oracle
