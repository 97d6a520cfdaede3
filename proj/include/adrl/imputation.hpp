#pragma once

// Parameter-free completion of missing views.
//
// For each view, cosine attention between samples is computed on raw
// features and sparsified per row. A missing view of sample i is then
// reconstructed from the samples that look most like i in the *other* views
// that both have, weighted by that cross-view affinity.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "adrl/data.hpp"
#include "adrl/matrix.hpp"
#include "adrl/rng.hpp"

namespace adrl {

struct ImputationConfig {
    double tau = 0.5;
    double percentile = 90.0;  // per-row threshold on off-diagonal attention
    std::size_t k = 10;
};

struct ImputationArtifacts {
    std::vector<Matrix> attention;  // A, per view
    std::vector<Matrix> filtered;   // thresholded A, diagonal zeroed
    std::vector<Matrix> affinity;   // B, per view
    std::vector<Matrix> transfer;   // K, per view, binary
    ImputationConfig config;
};

/// A(i,j) = exp(<h(x_i), h(x_j)> / tau) with h the row L2 normalization.
Matrix attention_scores(const Matrix& x, double tau);

/// Keeps A(i,j) only where it strictly exceeds row i's threshold. The
/// threshold is the q-th smallest off-diagonal entry with q = floor(p*m/100),
/// m = N-1; q = 0 keeps every off-diagonal entry.
Matrix threshold_filter(const Matrix& a, double percentile);

/// Affinity for `target` view, averaged over the other views both samples
/// have. Zero where no such view exists.
Matrix cross_view_affinity(std::span<const Matrix> filtered, const Matrix& view_mask,
                           std::size_t target);

/// Row i selects the k largest positive B(i,j) among samples j that have the
/// target view; ties go to the smaller j.
Matrix transfer_graph(const Matrix& affinity, const Matrix& view_mask, std::size_t target,
                      std::size_t k);

/// Affinity-weighted average of selected neighbors, normalized over the
/// selected set. Rows without neighbors get the mean of available rows.
Matrix impute_view(const Matrix& x, const Matrix& transfer, const Matrix& affinity,
                   const Matrix& view_mask, std::size_t target);

/// Row i from `x` where the view is available, else from `imputed`.
Matrix merge_views(const Matrix& imputed, const Matrix& x, const Matrix& view_mask,
                   std::size_t target);

struct FragmentMask {
    Matrix masked;  // input .* mask
    Matrix mask;
    std::size_t length = 0;
};

/// Zeroes one contiguous run of `length` entries per row. The 1-based start is
/// uniform in [1, d - length]. length = 0 is the identity and draws nothing.
FragmentMask fragment_mask(const Matrix& z, std::size_t length, RngStream& rng);

std::size_t default_fragment_length(std::size_t dim, double fraction = 0.1);

/// Runs attention, filtering, affinity, transfer graph, imputation and merge
/// for every view. Artifacts are kept only if `keep` is non-null.
std::vector<Matrix> complete_views(const MultiViewDataset& ds, const ImputationConfig& cfg,
                                   ImputationArtifacts* keep = nullptr);

/// Replaces unavailable rows of each view by the mean of its available rows.
std::vector<Matrix> mean_fill_views(const MultiViewDataset& ds);

}  // namespace adrl
