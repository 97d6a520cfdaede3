#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adrl/matrix.hpp"

namespace adrl {

/// The six multi-label measures, all oriented so that higher is better.
struct MetricsReport {
    double ap = 0.0;
    double one_minus_hl = 0.0;
    double one_minus_rl = 0.0;
    double auc = 0.0;
    double one_minus_oe = 0.0;
    double one_minus_cov = 0.0;

    static constexpr std::size_t kCount = 6;
    static constexpr std::array<std::string_view, kCount> kNames = {
        "AP", "1-HL", "1-RL", "AUC", "1-OE", "1-Cov"};
    static constexpr std::array<std::string_view, kCount> kKeys = {
        "ap", "one_minus_hl", "one_minus_rl", "auc", "one_minus_oe", "one_minus_cov"};

    std::array<double, kCount> values() const {
        return {ap, one_minus_hl, one_minus_rl, auc, one_minus_oe, one_minus_cov};
    }
    static MetricsReport from_values(const std::array<double, kCount>& v);
};

/// Raw (loss-oriented) values, before the 1-x convention.
struct RawMetrics {
    double average_precision = 0.0;
    double hamming_loss = 0.0;
    double ranking_loss = 0.0;
    double auc = 0.0;
    double one_error = 0.0;
    double coverage = 0.0;
};

/// scores and labels are N x C. Samples without a relevant label are skipped
/// by AP, RL, OE and Coverage; RL also skips samples without an irrelevant
/// label. AUC is the mean over labels having both classes.
RawMetrics compute_raw_metrics(const Matrix& scores, const Matrix& labels);
MetricsReport evaluate(const Matrix& scores, const Matrix& labels);

struct MetricsSummary {
    MetricsReport mean;
    MetricsReport std;  // population standard deviation
    std::size_t runs = 0;
};

MetricsSummary summarize(std::span<const MetricsReport> runs);

/// "0.438(0.006)"
std::string format_mean_std(double mean, double std);

/// Aligned text table with one row per metric.
std::string format_table(const MetricsSummary& s);
std::string format_table(const MetricsReport& r);

/// table[m] is the report of method m. Per metric, rank 1 is best and ties
/// share the mean of their ranks; the result is each method's mean rank.
std::vector<double> average_rank(std::span<const MetricsReport> table);

}  // namespace adrl
