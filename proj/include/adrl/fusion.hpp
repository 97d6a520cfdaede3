#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adrl/autodiff.hpp"
#include "adrl/matrix.hpp"
#include "adrl/rng.hpp"

namespace adrl {

constexpr double kProbClamp = 1e-7;
constexpr double kFusionLossFloor = 1e-8;
constexpr double kManifoldScale = 0.05;

/// feature[i][c] = sigmoid(l_c) .* z_i. Returned as C matrices of N x d
/// (index [c](i, :)).
std::vector<Matrix> label_specific_features(const Matrix& label_emb, const Matrix& z);

/// One affine d -> 1 head per class, stored as a C x d weight and 1 x C bias.
struct ClassHeads {
    ClassHeads() = default;
    ClassHeads(const std::string& name, std::size_t num_labels, std::size_t dim, RngStream& rng);

    void collect(std::vector<Parameter*>& out);

    Parameter weight;
    Parameter bias;
};

/// P(i,c) = clamp(sigmoid(head_c(sigmoid(l_c) .* z_i))). Computed as
/// z * (sigmoid(L) .* W)^T + b, which never materializes the N x C x d
/// label-specific tensor.
Var pseudo_predict(Tape& tape, ClassHeads& heads, Var label_emb, Var z);

/// Pairwise cross-entropy between feature similarity S = (1 + z_i.z_j)/2 and
/// label similarity T = clamp(p_i.p_j, 0, 1), averaged over ordered pairs
/// i != j. Inputs must already be row-normalized. N = 1 gives 0.
Var manifold_loss(Tape& tape, Var z_normalized, Var p_normalized);

/// Reciprocal-loss weights, normalized to sum to 1. Losses are floored at
/// 1e-8 first.
std::vector<double> fusion_weights(std::span<const double> losses);

/// sum_v w_v Z^v with w from fusion_weights; w is a constant for gradients.
Var fuse_channel(std::span<const Var> reps, std::span<const double> losses);

/// sigmoid(Z_p) .* Z_s
Var gate_fuse(Var shared, Var priv);

/// Cross-entropy over entries with G = 1, normalized by sum(G). sum(G) = 0
/// gives 0.
Var masked_ce(Tape& tape, Var p, const Matrix& y, const Matrix& g);

struct LossWeights {
    double alpha = 1.0;
    double lambda1 = 0.1;
    double lambda2 = 0.01;
};

struct LossComponents {
    Var mce;
    Var re;
    Var pmce;
    Var gc;
    Var dis;
};

/// alpha*mce + lambda1*re + lambda2*pmce + gc + dis. Invalid (unset)
/// components count as 0.
Var total_loss(Tape& tape, const LossComponents& parts, const LossWeights& w);

}  // namespace adrl
