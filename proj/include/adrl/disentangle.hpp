#pragma once

// Shared/private dual-channel representations and the losses that pull shared
// channels of different views together and push private channels apart.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adrl/autodiff.hpp"
#include "adrl/layers.hpp"
#include "adrl/rng.hpp"

namespace adrl {

constexpr double kVarianceFloor = 1e-6;

/// One channel (shared or private) of one view.
struct ChannelEncoder {
    ChannelEncoder() = default;
    ChannelEncoder(const std::string& name, std::size_t input_dim, std::size_t hidden,
                   std::size_t dim, RngStream& rng);

    void collect(std::vector<Parameter*>& out);

    Mlp2 initial;  // input -> hidden -> dim
    Affine mean;   // input -> dim
    Affine var;    // input -> dim, softplus + floor
    Mlp2 decoder;  // dim -> hidden -> input
};

struct ChannelOutput {
    Var initial;  // Z1
    Var mean;
    Var var;
    Var sampled;  // Z2 = mean + eps .* sqrt(var); equals mean when no noise stream
    Var fused;    // precision-weighted blend of Z2 and Z1
};

/// `noise == nullptr` selects evaluation mode (eps = 0).
ChannelOutput encode_channel(Tape& tape, ChannelEncoder& enc, Var input, RngStream* noise);

/// w = min(1, 1/var); returns w .* sampled + (1 - w) .* initial.
Var precision_fuse(Var sampled, Var initial, Var var);

/// Jensen-Shannon lower bound on I(a; b):
///   mean_i[-softplus(-T(a_i ++ b_i)) - softplus(T(a_pi(i) ++ b_i))]
/// with pi a cyclic shift by an offset drawn uniformly from [1, N-1].
Var jsd_mi_estimate(Tape& tape, Mlp2& scorer, Var a, Var b, RngStream& rng);

/// mean[log N(z_u; mu_u, var_u) - log N(z_v; 0, 1)] over samples and dims.
Var private_overlap_bound(Var z_u, Var mean_u, Var var_u, Var z_v);

struct DisentangleWeights {
    double gamma = 0.01;
    double beta = 0.01;
};

struct DisentangleTerms {
    Var loss;
    double mean_jsd = 0.0;      // averaged over ordered view pairs
    double mean_overlap = 0.0;  // averaged over ordered view pairs
};

/// Sum over ordered pairs u != v of
///   -gamma/(V(V-1)) * jsd(Z_s^u, Z_s^v) + beta/(V(V-1)) * overlap(u, v).
/// V = 1 gives a zero loss.
DisentangleTerms disentangle_loss(Tape& tape, std::span<const ChannelOutput> shared,
                                  std::span<const ChannelOutput> priv, Mlp2& scorer,
                                  const DisentangleWeights& weights, RngStream& rng);

/// (1/V) sum_v [mse(dec_s(Z_s^v), X^v) + mse(dec_p(Z_p^v), X^v)].
Var reconstruction_loss(Tape& tape, std::span<ChannelEncoder> shared_enc,
                        std::span<ChannelEncoder> priv_enc, std::span<const ChannelOutput> shared,
                        std::span<const ChannelOutput> priv, std::span<const Var> inputs);

Var mse(Var a, Var b);

}  // namespace adrl
