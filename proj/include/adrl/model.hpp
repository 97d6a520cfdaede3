#pragma once

// The trainable network: per-view dual-channel encoders, label prototypes,
// per-stream and final classifier heads, wired into the full objective.

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "adrl/autodiff.hpp"
#include "adrl/config.hpp"
#include "adrl/disentangle.hpp"
#include "adrl/fusion.hpp"
#include "adrl/labelgraph.hpp"
#include "adrl/layers.hpp"
#include "adrl/matrix.hpp"
#include "adrl/rng.hpp"

namespace adrl {

/// Reciprocal-loss fusion weights, one per view and channel.
struct FusionState {
    std::vector<double> shared;
    std::vector<double> priv;
};

struct ForwardOptions {
    /// Sampling noise and JSD shifts. Null selects evaluation mode: eps = 0
    /// and no disentanglement term.
    RngStream* noise = nullptr;
    /// Use these weights instead of computing them from manifold losses.
    const FusionState* frozen = nullptr;
};

/// Labels for the rows being fed; both N x C.
struct Supervision {
    const Matrix* labels = nullptr;
    const Matrix* label_mask = nullptr;
};

struct ForwardResult {
    Var total;       // invalid when no supervision was given
    Var prediction;  // N x C
    double mce = 0.0, re = 0.0, pmce = 0.0, gc = 0.0, dis = 0.0;
    double jsd = 0.0;      // mean shared-pair JSD estimate
    double overlap = 0.0;  // mean private overlap bound
    FusionState fusion;
};

class AdrlModel {
public:
    AdrlModel(std::vector<std::size_t> view_dims, std::size_t num_labels, const TrainConfig& cfg);

    ForwardResult forward(Tape& tape, std::span<const Matrix> views, const Matrix& q,
                          const Supervision& sup, const ForwardOptions& opts);

    /// Evaluation-mode prediction with the stored fusion weights.
    Matrix predict(std::span<const Matrix> views, const Matrix& q);

    std::vector<Parameter*> parameters();

    struct Snapshot {
        std::vector<Matrix> values;
        FusionState fusion;
    };
    Snapshot snapshot();
    void restore(const Snapshot& s);

    const TrainConfig& config() const noexcept { return cfg_; }
    const std::vector<std::size_t>& view_dims() const noexcept { return view_dims_; }
    std::size_t num_labels() const noexcept { return num_labels_; }

    /// Weights recorded by the latest training forward; used by predict().
    FusionState fusion;

    nlohmann::json to_json();
    static AdrlModel from_json(const nlohmann::json& j);

private:
    TrainConfig cfg_;
    std::vector<std::size_t> view_dims_;
    std::size_t num_labels_ = 0;

    // dual channel (use_s2)
    std::vector<ChannelEncoder> shared_enc_, priv_enc_;
    Mlp2 scorer_;
    // single channel (no S2)
    std::vector<Mlp2> single_enc_;
    // label prototypes and heads (use_s3)
    LabelPrototypes protos_;
    std::vector<ClassHeads> shared_heads_, priv_heads_;
    ClassHeads final_heads_;
    // plain fusion (no S3)
    Affine fuse_;
    Affine head_;
};

}  // namespace adrl
