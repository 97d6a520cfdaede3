#include "adrl/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adrl/error.hpp"

namespace adrl {

namespace {

Matrix normalize_rows(const Matrix& x) {
    Matrix h = x;
    for (std::size_t r = 0; r < h.rows(); ++r) {
        double s = 0.0;
        for (double v : h.row(r)) s += v * v;
        if (s == 0.0) continue;
        const double inv = 1.0 / std::sqrt(s);
        for (double& v : h.row(r)) v *= inv;
    }
    return h;
}

Matrix available_mean(const Matrix& x, const Matrix& w, std::size_t v) {
    Matrix mean(1, x.cols());
    std::size_t count = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (w(i, v) != 1.0) continue;
        ++count;
        for (std::size_t c = 0; c < x.cols(); ++c) mean[c] += x(i, c);
    }
    if (count == 0) {
        throw ConfigError("view " + std::to_string(v) + " has no available rows to impute from");
    }
    for (double& m : mean.data()) m /= static_cast<double>(count);
    return mean;
}

}  // namespace

Matrix attention_scores(const Matrix& x, double tau) {
    if (!(tau > 0.0)) throw ConfigError("attention temperature must be > 0");
    const Matrix h = normalize_rows(x);
    Matrix a = matmul_nt(h, h);
    for (double& v : a.data()) v = std::exp(v / tau);
    return a;
}

Matrix threshold_filter(const Matrix& a, double percentile) {
    if (!(percentile >= 0.0 && percentile < 100.0)) {
        throw ConfigError("threshold percentile must be in [0, 100)");
    }
    const std::size_t n = a.rows();
    Matrix out(n, a.cols());
    if (n < 2) return out;
    const std::size_t m = n - 1;
    const auto q = static_cast<std::size_t>(std::floor(percentile * static_cast<double>(m) / 100.0));
    std::vector<double> buf;
    buf.reserve(m);
    for (std::size_t i = 0; i < n; ++i) {
        double threshold = -std::numeric_limits<double>::infinity();
        if (q > 0) {
            buf.clear();
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) buf.push_back(a(i, j));
            std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(q - 1),
                             buf.end());
            threshold = buf[q - 1];
        }
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && a(i, j) > threshold) out(i, j) = a(i, j);
    }
    return out;
}

Matrix cross_view_affinity(std::span<const Matrix> filtered, const Matrix& w, std::size_t target) {
    const std::size_t nv = filtered.size();
    if (nv < 2) throw ConfigError("cross-view affinity needs at least two views");
    if (target >= nv || w.cols() != nv) throw ConfigError("cross_view_affinity: bad view index");
    const std::size_t n = w.rows();
    Matrix num(n, n), den(n, n);
    for (std::size_t k = 0; k < nv; ++k) {
        if (k == target) continue;
        const Matrix& at = filtered[k];
        for (std::size_t i = 0; i < n; ++i) {
            if (w(i, k) != 1.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (w(j, k) != 1.0) continue;
                num(i, j) += at(i, j);
                den(i, j) += 1.0;
            }
        }
    }
    for (std::size_t k = 0; k < num.size(); ++k) num[k] = den[k] > 0.0 ? num[k] / den[k] : 0.0;
    return num;
}

Matrix transfer_graph(const Matrix& b, const Matrix& w, std::size_t target, std::size_t k) {
    if (k < 1) throw ConfigError("transfer graph needs k >= 1");
    const std::size_t n = b.rows();
    Matrix out(n, n);
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (w(j, target) == 1.0 && b(i, j) > 0.0) cand.push_back(j);
        const std::size_t take = std::min(k, cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take),
                          cand.end(), [&](std::size_t x, std::size_t y) {
                              if (b(i, x) != b(i, y)) return b(i, x) > b(i, y);
                              return x < y;
                          });
        for (std::size_t t = 0; t < take; ++t) out(i, cand[t]) = 1.0;
    }
    return out;
}

Matrix impute_view(const Matrix& x, const Matrix& transfer, const Matrix& b, const Matrix& w,
                   std::size_t target) {
    const std::size_t n = x.rows();
    if (transfer.rows() != n || transfer.cols() != n || !b.same_shape(transfer)) {
        throw ConfigError("impute_view: graph shapes do not match " + x.shape_string());
    }
    const Matrix fallback = available_mean(x, w, target);
    Matrix out(n, x.cols());
    for (std::size_t i = 0; i < n; ++i) {
        double den = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double wt = transfer(i, j) * b(i, j);
            if (wt == 0.0) continue;
            den += wt;
            for (std::size_t c = 0; c < x.cols(); ++c) out(i, c) += wt * x(j, c);
        }
        if (den > 0.0) {
            for (double& v : out.row(i)) v /= den;
        } else {
            for (std::size_t c = 0; c < x.cols(); ++c) out(i, c) = fallback[c];
        }
    }
    return out;
}

Matrix merge_views(const Matrix& imputed, const Matrix& x, const Matrix& w, std::size_t target) {
    if (!imputed.same_shape(x)) throw ConfigError("merge_views: shape mismatch");
    Matrix out = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (w(i, target) == 1.0) continue;
        std::copy(imputed.row(i).begin(), imputed.row(i).end(), out.row(i).begin());
    }
    return out;
}

FragmentMask fragment_mask(const Matrix& z, std::size_t length, RngStream& rng) {
    const std::size_t d = z.cols();
    if (length >= d && !(length == 0 && d == 0)) {
        throw ConfigError("fragment length " + std::to_string(length) + " must be < view dim " +
                          std::to_string(d));
    }
    FragmentMask fm{z, Matrix::ones(z.rows(), d), length};
    if (length == 0) return fm;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const std::size_t start = rng.below(d - length);  // 0-based form of [1, d - l]
        for (std::size_t c = start; c < start + length; ++c) {
            fm.mask(i, c) = 0.0;
            fm.masked(i, c) = 0.0;
        }
    }
    return fm;
}

std::size_t default_fragment_length(std::size_t dim, double fraction) {
    const auto l = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(dim)));
    return dim == 0 ? 0 : std::min(l, dim - 1);
}

std::vector<Matrix> complete_views(const MultiViewDataset& ds, const ImputationConfig& cfg,
                                   ImputationArtifacts* keep) {
    const std::size_t nv = ds.num_views();
    const Matrix& w = ds.view_mask;
    const bool any_missing =
        std::any_of(w.data().begin(), w.data().end(), [](double x) { return x == 0.0; });
    if (!any_missing) {
        if (keep != nullptr) keep->config = cfg;
        return ds.views;
    }
    if (nv < 2) throw ConfigError("cannot impute with a single view");

    std::vector<Matrix> attention, filtered;
    for (std::size_t v = 0; v < nv; ++v) {
        Matrix a = attention_scores(ds.views[v], cfg.tau);
        filtered.push_back(threshold_filter(a, cfg.percentile));
        if (keep != nullptr) attention.push_back(std::move(a));
    }
    std::vector<Matrix> out;
    std::vector<Matrix> affinity, transfer;
    for (std::size_t v = 0; v < nv; ++v) {
        Matrix b = cross_view_affinity(filtered, w, v);
        Matrix k = transfer_graph(b, w, v, cfg.k);
        const Matrix imputed = impute_view(ds.views[v], k, b, w, v);
        out.push_back(merge_views(imputed, ds.views[v], w, v));
        if (keep != nullptr) {
            affinity.push_back(std::move(b));
            transfer.push_back(std::move(k));
        }
    }
    if (keep != nullptr) {
        keep->attention = std::move(attention);
        keep->filtered = std::move(filtered);
        keep->affinity = std::move(affinity);
        keep->transfer = std::move(transfer);
        keep->config = cfg;
    }
    return out;
}

std::vector<Matrix> mean_fill_views(const MultiViewDataset& ds) {
    std::vector<Matrix> out;
    for (std::size_t v = 0; v < ds.num_views(); ++v) {
        const Matrix mean = available_mean(ds.views[v], ds.view_mask, v);
        Matrix x = ds.views[v];
        for (std::size_t i = 0; i < x.rows(); ++i) {
            if (ds.view_mask(i, v) == 1.0) continue;
            for (std::size_t c = 0; c < x.cols(); ++c) x(i, c) = mean[c];
        }
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace adrl
