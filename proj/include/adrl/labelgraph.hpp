#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adrl/autodiff.hpp"
#include "adrl/layers.hpp"
#include "adrl/matrix.hpp"
#include "adrl/rng.hpp"

namespace adrl {

/// Q(i,j) = #{k : i and j both observed positive} / #{k : i observed positive},
/// counted over `rows`. Rows of Q for labels never observed positive are 0.
Matrix cooccurrence(const Matrix& labels, const Matrix& label_mask,
                    std::span<const std::size_t> rows);

/// Neighborhoods for attention: Q(i,j) > 0, plus the self-loop.
Matrix neighbor_mask(const Matrix& q);

/// Single-layer multi-head graph attention over labels.
///
/// Attention logits are LeakyReLU(a . [z_i W ++ z_j W]) with `attn` holding a
/// as a (d x 2) matrix: column 0 scores the centre node, column 1 the
/// neighbor. Each head k aggregates alpha * z W_k; heads are averaged and
/// passed through LeakyReLU.
struct GraphAttention {
    GraphAttention() = default;
    GraphAttention(std::size_t dim, std::size_t heads, double slope, RngStream& rng);

    void collect(std::vector<Parameter*>& out);

    Parameter attn;        // d x 2
    Parameter projection;  // d x d
    std::vector<Parameter> heads;
    double slope = 0.2;
};

struct GatOutput {
    Var refined;
    Var attention;  // C x C, rows sum to 1 over the neighborhood
};

GatOutput gat_refine(Tape& tape, GraphAttention& gat, Var z, const Matrix& q);

/// Learnable label seeds (one-hot init) with Gaussian mean/variance encoders.
struct LabelPrototypes {
    LabelPrototypes() = default;
    LabelPrototypes(std::size_t num_labels, std::size_t dim, std::size_t heads, double slope,
                    RngStream& rng);

    void collect(std::vector<Parameter*>& out);

    Parameter seeds;  // C x C
    Affine mean_enc;  // C -> d
    Affine var_enc;   // C -> d, softplus + floor
    GraphAttention gat;
};

struct LabelEmbeddings {
    Var mean;
    Var var;
    Var refined_mean;
    Var refined_var;
    Var embeddings;  // C x d
    Var mean_attention;
    Var var_attention;
};

/// l = mu' + eps .* sqrt(var'); eps = 0 when `noise` is null.
Var sample_label_embeddings(Tape& tape, Var refined_mean, Var refined_var, RngStream* noise);

LabelEmbeddings label_embeddings(Tape& tape, LabelPrototypes& protos, const Matrix& q,
                                 RngStream* noise);

}  // namespace adrl
