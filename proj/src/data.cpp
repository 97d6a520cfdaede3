#include "adrl/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "adrl/error.hpp"
#include "adrl/rng.hpp"

namespace adrl {

std::vector<std::size_t> MultiViewDataset::view_dims() const {
    std::vector<std::size_t> dims;
    dims.reserve(views.size());
    for (const Matrix& v : views) dims.push_back(v.cols());
    return dims;
}

std::vector<std::size_t> MultiViewDataset::rows_in(Split s) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == s) rows.push_back(i);
    return rows;
}

namespace {

bool is_binary(const Matrix& m) {
    return std::all_of(m.data().begin(), m.data().end(),
                       [](double x) { return x == 0.0 || x == 1.0; });
}

}  // namespace

void MultiViewDataset::validate() const {
    const std::size_t n = labels.rows();
    if (views.empty()) throw ConfigError("dataset has no views");
    if (n == 0) throw ConfigError("dataset has no samples");
    if (labels.cols() == 0) throw ConfigError("dataset has no labels");
    for (std::size_t v = 0; v < views.size(); ++v) {
        if (views[v].cols() == 0) throw ConfigError("view " + std::to_string(v) + " is empty");
        if (views[v].rows() != n) {
            throw ConfigError("view " + std::to_string(v) + " has " +
                              std::to_string(views[v].rows()) + " rows, labels have " +
                              std::to_string(n));
        }
        if (!views[v].all_finite()) {
            throw ConfigError("view " + std::to_string(v) + " contains non-finite values");
        }
    }
    if (!is_binary(labels)) throw ConfigError("labels must be binary");
    if (view_mask.rows() != n || view_mask.cols() != views.size()) {
        throw ConfigError("view mask shape " + view_mask.shape_string() + " does not match N x V");
    }
    if (label_mask.rows() != n || label_mask.cols() != labels.cols()) {
        throw ConfigError("label mask shape " + label_mask.shape_string() +
                          " does not match N x C");
    }
    if (!is_binary(view_mask)) throw ConfigError("view mask must be binary");
    if (!is_binary(label_mask)) throw ConfigError("label mask must be binary");
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double w : view_mask.row(i)) s += w;
        if (s < 1.0) {
            throw ConfigError("sample " + std::to_string(i) + " has no available view");
        }
    }
    if (split.size() != n) throw ConfigError("split tags do not cover every sample");
}

MultiViewDataset make_dataset(std::vector<Matrix> views, Matrix labels) {
    MultiViewDataset ds;
    const std::size_t n = labels.rows();
    ds.view_mask = Matrix::ones(n, views.size());
    ds.label_mask = Matrix::ones(n, labels.cols());
    ds.views = std::move(views);
    ds.labels = std::move(labels);
    ds.split.assign(n, Split::train);
    ds.validate();
    return ds;
}

MultiViewDataset apply_missingness(const MultiViewDataset& ds, const MissingnessSpec& spec) {
    if (!(spec.fmr >= 0.0) || spec.fmr >= 1.0) throw ConfigError("fmr must be < 1");
    if (!(spec.lmr >= 0.0) || spec.lmr >= 1.0) throw ConfigError("lmr must be in [0, 1)");
    ds.validate();
    const auto all_ones = [](const Matrix& m) {
        return std::all_of(m.data().begin(), m.data().end(), [](double x) { return x == 1.0; });
    };
    if (!all_ones(ds.view_mask) || !all_ones(ds.label_mask)) {
        throw ConfigError("apply_missingness expects a fully observed dataset");
    }

    MultiViewDataset out = ds;
    const std::size_t n = ds.num_samples();
    const std::size_t nv = ds.num_views();
    Matrix& w = out.view_mask;
    RngStream root(spec.seed, 0x4d495353);  // "MISS"

    const auto drop = static_cast<std::size_t>(std::floor(spec.fmr * static_cast<double>(n)));
    for (std::size_t v = 0; v < nv; ++v) {
        RngStream rng = root.fork(v);
        const auto perm = rng.permutation(n);
        for (std::size_t k = 0; k < drop; ++k) w(perm[k], v) = 0.0;
    }

    const auto row_count = [&](std::size_t i) {
        double s = 0.0;
        for (double x : w.row(i)) s += x;
        return s;
    };
    RngStream repair = root.fork(0x52455041);  // "REPA"
    for (std::size_t i = 0; i < n; ++i) {
        if (row_count(i) >= 1.0) continue;
        const std::size_t v = repair.below(nv);
        w(i, v) = 1.0;
        std::vector<std::size_t> donors;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && w(j, v) == 1.0 && row_count(j) >= 2.0) donors.push_back(j);
        if (!donors.empty()) w(donors[repair.below(donors.size())], v) = 0.0;
    }

    for (std::size_t v = 0; v < nv; ++v)
        for (std::size_t i = 0; i < n; ++i)
            if (w(i, v) == 0.0) std::fill(out.views[v].row(i).begin(), out.views[v].row(i).end(), 0.0);

    Matrix& g = out.label_mask;
    for (std::size_t c = 0; c < ds.num_labels(); ++c) {
        RngStream rng = root.fork(0x4c41424c00000000ULL + c);  // "LABL"
        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < n; ++i) {
            if (out.split[i] == Split::test) continue;
            (ds.labels(i, c) == 1.0 ? pos : neg).push_back(i);
        }
        for (auto* group : {&pos, &neg}) {
            const auto hide =
                static_cast<std::size_t>(std::floor(spec.lmr * static_cast<double>(group->size())));
            const auto perm = rng.permutation(group->size());
            for (std::size_t k = 0; k < hide; ++k) g((*group)[perm[k]], c) = 0.0;
        }
    }
    out.validate();
    return out;
}

MultiViewDataset split_dataset(const MultiViewDataset& ds, std::array<double, 3> ratios,
                               std::uint64_t seed) {
    double total = 0.0;
    for (double r : ratios) {
        if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("split ratios must be >= 0");
        total += r;
    }
    if (total <= 0.0) throw ConfigError("split ratios must not all be zero");
    const std::size_t n = ds.num_samples();
    const bool three_way = std::all_of(ratios.begin(), ratios.end(), [](double r) { return r > 0; });
    if (three_way && n < 10) {
        throw ConfigError("split: N=" + std::to_string(n) + " is too small for three splits");
    }
    std::array<std::size_t, 3> bounds{};
    double cum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        cum += ratios[k] / total;
        bounds[k] = k == 2 ? n
                           : static_cast<std::size_t>(std::llround(cum * static_cast<double>(n)));
    }
    std::size_t prev = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        if (ratios[k] > 0 && bounds[k] == prev) {
            throw ConfigError("split: ratio " + std::to_string(k) + " yields an empty split");
        }
        prev = bounds[k];
    }

    MultiViewDataset out = ds;
    RngStream rng(seed, 0x53504c54);  // "SPLT"
    const auto perm = rng.permutation(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        Split s = pos < bounds[0] ? Split::train : pos < bounds[1] ? Split::val : Split::test;
        out.split[perm[pos]] = s;
    }
    return out;
}

std::size_t synthetic_view_dim(const SyntheticSpec& spec, std::size_t v) {
    return 2 * (spec.shared_dim + spec.private_dim) + 4 * v;
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n < 1 || spec.v < 1 || spec.c < 1 || spec.shared_dim < 1 || spec.private_dim < 1) {
        throw ConfigError("synthetic: all counts must be >= 1");
    }
    if (!(spec.noise >= 0.0)) throw ConfigError("synthetic: noise must be >= 0");
    const std::size_t n = spec.n, ds = spec.shared_dim, dp = spec.private_dim;
    RngStream root(spec.seed, 0x53594e54);  // "SYNT"

    RngStream lat = root.fork(1);
    Matrix shared(n, ds);
    for (double& x : shared.data()) x = lat.normal();

    std::vector<Matrix> views;
    for (std::size_t v = 0; v < spec.v; ++v) {
        RngStream rv = root.fork(100 + v);
        const std::size_t dv = synthetic_view_dim(spec, v);
        Matrix priv(n, dp);
        for (double& x : priv.data()) x = rv.normal();
        Matrix proj(ds + dp, dv);
        const double s = 1.0 / std::sqrt(static_cast<double>(ds + dp));
        for (double& x : proj.data()) x = s * rv.normal();
        Matrix latent(n, ds + dp);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < ds; ++k) latent(i, k) = shared(i, k);
            for (std::size_t k = 0; k < dp; ++k) latent(i, ds + k) = priv(i, k);
        }
        Matrix x = matmul(latent, proj);
        if (spec.noise > 0.0)
            for (double& e : x.data()) e += spec.noise * rv.normal();
        views.push_back(std::move(x));
    }

    // Label directions: odd labels mostly copy the preceding even label.
    RngStream rl = root.fork(2);
    Matrix dirs(ds, spec.c);
    constexpr double kPairCorr = 0.85;
    for (std::size_t c = 0; c < spec.c; ++c) {
        for (std::size_t k = 0; k < ds; ++k) {
            const double fresh = rl.normal();
            dirs(k, c) = (c % 2 == 1) ? kPairCorr * dirs(k, c - 1) +
                                            std::sqrt(1.0 - kPairCorr * kPairCorr) * fresh
                                      : fresh;
        }
    }
    const Matrix scores = matmul(shared, dirs);
    Matrix labels(n, spec.c);
    for (std::size_t c = 0; c < spec.c; ++c) {
        const double rate = rl.uniform(0.2, 0.5);
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = scores(i, c);
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        auto positives = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
        positives = std::clamp<std::size_t>(positives, n > 1 ? 1 : 0, n > 1 ? n - 1 : n);
        double threshold;
        if (n == 1) {
            threshold = sorted[0] - 1.0;
        } else {
            // Midpoint between order statistics keeps a margin around the cut.
            const std::size_t cut = n - positives;
            threshold = 0.5 * (sorted[cut - 1] + sorted[cut]);
        }
        for (std::size_t i = 0; i < n; ++i) labels(i, c) = col[i] > threshold ? 1.0 : 0.0;
    }
    return make_dataset(std::move(views), std::move(labels));
}

}  // namespace adrl
