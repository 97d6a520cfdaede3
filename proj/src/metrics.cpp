#include "adrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "adrl/error.hpp"

namespace adrl {

MetricsReport MetricsReport::from_values(const std::array<double, kCount>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

namespace {

/// Labels of one sample ordered by descending score, ties by label index.
std::vector<std::size_t> label_order(std::span<const double> s) {
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    return order;
}

}  // namespace

RawMetrics compute_raw_metrics(const Matrix& scores, const Matrix& labels) {
    if (!scores.same_shape(labels)) {
        throw ConfigError("metrics: scores " + scores.shape_string() + " vs labels " +
                          labels.shape_string());
    }
    const std::size_t n = scores.rows(), c = scores.cols();
    if (n == 0 || c == 0) throw ConfigError("metrics: need N > 0 and C > 0");

    RawMetrics m;
    std::size_t wrong = 0;
    for (std::size_t k = 0; k < scores.size(); ++k)
        if ((scores[k] >= 0.5 ? 1.0 : 0.0) != labels[k]) ++wrong;
    m.hamming_loss = static_cast<double>(wrong) / static_cast<double>(n * c);

    double ap = 0.0, oe = 0.0, cov = 0.0, rl = 0.0;
    std::size_t ranked = 0, rl_count = 0;
    std::vector<std::size_t> rank(c);
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = scores.row(i);
        const auto y = labels.row(i);
        const std::size_t npos =
            static_cast<std::size_t>(std::count(y.begin(), y.end(), 1.0));
        if (npos == 0) continue;
        ++ranked;
        const auto order = label_order(s);
        for (std::size_t r = 0; r < c; ++r) rank[order[r]] = r + 1;

        oe += y[order[0]] == 1.0 ? 0.0 : 1.0;

        std::size_t max_rank = 0;
        double prec = 0.0;
        std::size_t seen = 0;
        for (std::size_t r = 0; r < c; ++r) {
            if (y[order[r]] != 1.0) continue;
            ++seen;
            max_rank = r + 1;
            prec += static_cast<double>(seen) / static_cast<double>(r + 1);
        }
        ap += prec / static_cast<double>(npos);
        cov += static_cast<double>(max_rank - 1) / static_cast<double>(c);

        const std::size_t nneg = c - npos;
        if (nneg > 0) {
            double bad = 0.0;
            for (std::size_t p = 0; p < c; ++p) {
                if (y[p] != 1.0) continue;
                for (std::size_t q = 0; q < c; ++q) {
                    if (y[q] == 1.0) continue;
                    if (s[p] < s[q]) bad += 1.0;
                    else if (s[p] == s[q]) bad += 0.5;
                }
            }
            rl += bad / static_cast<double>(npos * nneg);
            ++rl_count;
        }
    }
    if (ranked > 0) {
        m.average_precision = ap / static_cast<double>(ranked);
        m.one_error = oe / static_cast<double>(ranked);
        m.coverage = cov / static_cast<double>(ranked);
    }
    if (rl_count > 0) m.ranking_loss = rl / static_cast<double>(rl_count);

    // Label-wise AUC via sorted scores with midrank ties.
    double auc = 0.0;
    std::size_t auc_labels = 0;
    std::vector<std::size_t> idx(n);
    for (std::size_t j = 0; j < c; ++j) {
        std::size_t npos = 0;
        for (std::size_t i = 0; i < n; ++i) npos += labels(i, j) == 1.0 ? 1 : 0;
        const std::size_t nneg = n - npos;
        if (npos == 0 || nneg == 0) continue;
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return scores(a, j) < scores(b, j); });
        double pos_rank_sum = 0.0;
        for (std::size_t r = 0; r < n;) {
            std::size_t e = r;
            while (e + 1 < n && scores(idx[e + 1], j) == scores(idx[r], j)) ++e;
            const double mid = 0.5 * static_cast<double>(r + e) + 1.0;
            for (std::size_t t = r; t <= e; ++t)
                if (labels(idx[t], j) == 1.0) pos_rank_sum += mid;
            r = e + 1;
        }
        const double np = static_cast<double>(npos), nn = static_cast<double>(nneg);
        auc += (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
        ++auc_labels;
    }
    if (auc_labels > 0) m.auc = auc / static_cast<double>(auc_labels);
    return m;
}

MetricsReport evaluate(const Matrix& scores, const Matrix& labels) {
    const RawMetrics r = compute_raw_metrics(scores, labels);
    MetricsReport out;
    out.ap = r.average_precision;
    out.one_minus_hl = 1.0 - r.hamming_loss;
    out.one_minus_rl = 1.0 - r.ranking_loss;
    out.auc = r.auc;
    out.one_minus_oe = 1.0 - r.one_error;
    out.one_minus_cov = 1.0 - r.coverage;
    return out;
}

MetricsSummary summarize(std::span<const MetricsReport> runs) {
    MetricsSummary s;
    s.runs = runs.size();
    if (runs.empty()) return s;
    std::array<double, MetricsReport::kCount> mean{}, var{};
    for (const auto& r : runs) {
        const auto v = r.values();
        for (std::size_t k = 0; k < v.size(); ++k) mean[k] += v[k];
    }
    for (double& m : mean) m /= static_cast<double>(runs.size());
    for (const auto& r : runs) {
        const auto v = r.values();
        for (std::size_t k = 0; k < v.size(); ++k) var[k] += (v[k] - mean[k]) * (v[k] - mean[k]);
    }
    for (double& x : var) x = std::sqrt(x / static_cast<double>(runs.size()));
    s.mean = MetricsReport::from_values(mean);
    s.std = MetricsReport::from_values(var);
    return s;
}

std::string format_mean_std(double mean, double std) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f(%.3f)", mean, std);
    return buf;
}

std::string format_table(const MetricsSummary& s) {
    std::ostringstream os;
    const auto m = s.mean.values();
    const auto d = s.std.values();
    char line[96];
    std::snprintf(line, sizeof line, "%-8s %s\n", "metric", "mean(std)");
    os << line;
    for (std::size_t k = 0; k < MetricsReport::kCount; ++k) {
        std::snprintf(line, sizeof line, "%-8s %s\n", std::string(MetricsReport::kNames[k]).c_str(),
                      format_mean_std(m[k], d[k]).c_str());
        os << line;
    }
    return os.str();
}

std::string format_table(const MetricsReport& r) {
    std::ostringstream os;
    const auto v = r.values();
    char line[96];
    for (std::size_t k = 0; k < MetricsReport::kCount; ++k) {
        std::snprintf(line, sizeof line, "%-8s %.4f\n", std::string(MetricsReport::kNames[k]).c_str(),
                      v[k]);
        os << line;
    }
    return os.str();
}

std::vector<double> average_rank(std::span<const MetricsReport> table) {
    const std::size_t methods = table.size();
    if (methods < 2) throw ConfigError("average_rank needs at least two methods");
    std::vector<double> total(methods, 0.0);
    for (std::size_t k = 0; k < MetricsReport::kCount; ++k) {
        std::vector<double> v(methods);
        for (std::size_t m = 0; m < methods; ++m) v[m] = table[m].values()[k];
        for (std::size_t m = 0; m < methods; ++m) {
            std::size_t better = 0, equal = 0;
            for (std::size_t o = 0; o < methods; ++o) {
                if (v[o] > v[m]) ++better;
                else if (v[o] == v[m]) ++equal;  // includes m itself
            }
            // Tied block occupies ranks better+1 .. better+equal.
            total[m] += static_cast<double>(better) + 0.5 * static_cast<double>(equal + 1);
        }
    }
    for (double& t : total) t /= static_cast<double>(MetricsReport::kCount);
    return total;
}

}  // namespace adrl
