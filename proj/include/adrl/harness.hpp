#pragma once

// Training loop, ablations, the repeated incomplete-data protocol and run
// persistence.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adrl/config.hpp"
#include "adrl/data.hpp"
#include "adrl/metrics.hpp"
#include "adrl/model.hpp"
#include "adrl/optim.hpp"

namespace adrl {

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double total = 0.0;
    double mce = 0.0, re = 0.0, pmce = 0.0, gc = 0.0, dis = 0.0;
    double val_ap = 0.0;
    double jsd = 0.0;      // mean shared-pair JSD estimate
    double overlap = 0.0;  // mean private overlap bound

    nlohmann::json to_json() const;
    static EpochRecord from_json(const nlohmann::json& j);
    bool operator==(const EpochRecord&) const = default;
};

struct RunRecord {
    TrainConfig config;
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    MetricsReport test;
    double wall_seconds = 0.0;  // persisted in a sidecar, not in summary.json

    /// Everything except per-epoch rows and wall time.
    nlohmann::json summary_json() const;
};

/// Model plus what it needs at prediction time.
struct TrainedModel {
    AdrlModel model;
    Matrix cooccurrence;

    nlohmann::json to_json();
    static TrainedModel from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path);
    static TrainedModel load(const std::filesystem::path& path);
};

/// Views with missing rows completed (cross-view propagation, or the
/// available-row mean when S1 is ablated).
std::vector<Matrix> prepare_views(const MultiViewDataset& ds, const TrainConfig& cfg);

/// Full-batch gradient descent on the training rows, keeping the parameters
/// of the epoch with the best validation AP. Throws DivergenceError naming
/// the epoch and op when a non-finite value appears.
RunRecord train(const MultiViewDataset& ds, const TrainConfig& cfg,
                std::optional<TrainedModel>* out = nullptr);

RunRecord ablate(const MultiViewDataset& ds, const TrainConfig& cfg, Variant variant);

/// Test-row metrics (all rows when the dataset has no test split) against
/// the ground-truth labels.
MetricsReport evaluate_model(TrainedModel& tm, const MultiViewDataset& ds);

struct RepeatResult {
    std::vector<RunRecord> runs;
    std::vector<std::uint64_t> seeds;
    MetricsSummary summary;
    std::string table;
};

/// Seed of repetition r: mix64(seed + r), or `seed` itself when
/// `derive_seeds` is false.
std::uint64_t repetition_seed(std::uint64_t seed, std::size_t r, bool derive_seeds = true);

/// Per repetition: split, mask (fmr, lmr) and initialize with the
/// repetition's seed, then train. `source` must be fully observed.
RepeatResult repeat_protocol(const MultiViewDataset& source, const TrainConfig& cfg,
                             bool derive_seeds = true);

/// Formats a summary as "metric mean(std)" rows.
std::string protocol_table(const MetricsSummary& s);

/// epochs.jsonl, summary.json and timing.json in `dir`.
void write_run(const RunRecord& run, const std::filesystem::path& dir);
RunRecord read_run(const std::filesystem::path& dir);

struct GradCheckSetup {
    std::size_t n = 8;
    std::size_t views = 2;
    std::size_t labels = 3;
    std::size_t d = 4;
    std::size_t hidden = 8;
    std::size_t heads = 2;
    std::uint64_t seed = 0;
    Variant variant = Variant::full;
};

/// Central-difference check of the full objective on a random toy problem.
/// Fusion weights are frozen at their unperturbed values because they carry
/// no gradient.
GradCheckReport model_gradcheck(const GradCheckSetup& setup, double step, double tolerance);

}  // namespace adrl
