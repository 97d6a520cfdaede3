#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "adrl/matrix.hpp"

namespace adrl {

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

/// Multi-view multi-label data with availability masks.
///
/// views[v] is N x d_v; labels is N x C binary; view_mask (W) is N x V and
/// label_mask (G) is N x C, both binary. Unavailable view rows are stored as
/// zeros and are identified only through W.
struct MultiViewDataset {
    std::vector<Matrix> views;
    Matrix labels;
    Matrix view_mask;
    Matrix label_mask;
    std::vector<Split> split;

    std::size_t num_samples() const noexcept { return labels.rows(); }
    std::size_t num_views() const noexcept { return views.size(); }
    std::size_t num_labels() const noexcept { return labels.cols(); }
    std::vector<std::size_t> view_dims() const;

    std::vector<std::size_t> rows_in(Split s) const;

    /// Throws ConfigError describing the first violated invariant.
    void validate() const;
};

/// Dataset with all views and labels observed and every sample in train.
MultiViewDataset make_dataset(std::vector<Matrix> views, Matrix labels);

struct MissingnessSpec {
    double fmr = 0.0;
    double lmr = 0.0;
    std::uint64_t seed = 0;
};

/// Masks floor(fmr*N) samples per view (then repairs rows that lost every
/// view) and, per label, hides floor(lmr*#pos) positives and floor(lmr*#neg)
/// negatives among non-test rows. Masked view rows are zeroed.
MultiViewDataset apply_missingness(const MultiViewDataset& ds, const MissingnessSpec& spec);

/// Random permutation cut into contiguous train/val/test blocks. Ratios are
/// normalized by their sum.
MultiViewDataset split_dataset(const MultiViewDataset& ds, std::array<double, 3> ratios,
                               std::uint64_t seed);

struct SyntheticSpec {
    std::size_t n = 2000;
    std::size_t v = 2;
    std::size_t c = 6;
    std::size_t shared_dim = 8;
    std::size_t private_dim = 8;
    double noise = 0.1;
    std::uint64_t seed = 0;
};

/// Views are linear images of a shared latent plus a per-view private latent;
/// labels threshold linear scores of the shared latent, with consecutive label
/// pairs sharing most of their direction so they co-occur.
MultiViewDataset generate_synthetic(const SyntheticSpec& spec);

/// Feature dimension of view v for a synthetic spec.
std::size_t synthetic_view_dim(const SyntheticSpec& spec, std::size_t v);

}  // namespace adrl
