#include "adrl/model.hpp"

#include <optional>
#include <string>

#include "adrl/error.hpp"

namespace adrl {

namespace {

// Salts for the per-forward noise streams.
constexpr std::uint64_t kLabelNoise = 1;
constexpr std::uint64_t kShiftNoise = 2;
constexpr std::uint64_t kChannelNoise = 16;

Var weighted_views(std::span<const Var> reps, std::span<const double> w) {
    if (reps.size() != w.size()) {
        throw ConfigError("fusion: " + std::to_string(w.size()) + " weights for " +
                          std::to_string(reps.size()) + " views");
    }
    Var out;
    for (std::size_t v = 0; v < reps.size(); ++v) {
        const Var term = ad::scale(reps[v], w[v]);
        out = out.valid() ? ad::add(out, term) : term;
    }
    return out;
}

nlohmann::json matrix_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

}  // namespace

AdrlModel::AdrlModel(std::vector<std::size_t> view_dims, std::size_t num_labels,
                     const TrainConfig& cfg)
    : cfg_(cfg), view_dims_(std::move(view_dims)), num_labels_(num_labels) {
    cfg_.validate();
    if (view_dims_.empty()) throw ConfigError("model needs at least one view");
    if (num_labels_ == 0) throw ConfigError("model needs at least one label");
    RngStream rng(cfg_.seed, 0x5eed);
    const std::size_t nv = view_dims_.size(), d = cfg_.d, h = cfg_.hidden;
    for (std::size_t v = 0; v < nv; ++v) {
        const std::string tag = std::to_string(v);
        if (cfg_.use_s2) {
            shared_enc_.emplace_back("shared" + tag, view_dims_[v], h, d, rng);
            priv_enc_.emplace_back("private" + tag, view_dims_[v], h, d, rng);
        } else {
            single_enc_.emplace_back("encoder" + tag, view_dims_[v], h, d, rng);
        }
    }
    if (cfg_.use_s2) scorer_ = Mlp2("scorer", 2 * d, h, 1, rng);
    const std::size_t channels = cfg_.use_s2 ? 2 : 1;
    if (cfg_.use_s3) {
        protos_ = LabelPrototypes(num_labels_, d, cfg_.heads, cfg_.leaky_slope, rng);
        for (std::size_t v = 0; v < nv; ++v) {
            shared_heads_.emplace_back("head.shared" + std::to_string(v), num_labels_, d, rng);
            if (cfg_.use_s2)
                priv_heads_.emplace_back("head.private" + std::to_string(v), num_labels_, d, rng);
        }
        final_heads_ = ClassHeads("head.final", num_labels_, d, rng);
    } else {
        fuse_ = Affine("fuse", channels * nv * d, d, rng);
        head_ = Affine("head", d, num_labels_, rng);
    }
}

std::vector<Parameter*> AdrlModel::parameters() {
    std::vector<Parameter*> out;
    for (auto& e : shared_enc_) e.collect(out);
    for (auto& e : priv_enc_) e.collect(out);
    for (auto& e : single_enc_) e.collect(out);
    if (cfg_.use_s2) scorer_.collect(out);
    if (cfg_.use_s3) {
        protos_.collect(out);
        for (auto& hd : shared_heads_) hd.collect(out);
        for (auto& hd : priv_heads_) hd.collect(out);
        final_heads_.collect(out);
    } else {
        fuse_.collect(out);
        head_.collect(out);
    }
    return out;
}

ForwardResult AdrlModel::forward(Tape& tape, std::span<const Matrix> views, const Matrix& q,
                                 const Supervision& sup, const ForwardOptions& opts) {
    const std::size_t nv = view_dims_.size();
    if (views.size() != nv) {
        throw ConfigError("model expects " + std::to_string(nv) + " views, got " +
                          std::to_string(views.size()));
    }
    const std::size_t n = views[0].rows();
    for (std::size_t v = 0; v < nv; ++v) {
        if (views[v].rows() != n || views[v].cols() != view_dims_[v]) {
            throw ConfigError("view " + std::to_string(v) + " has shape " +
                              views[v].shape_string() + ", expected " + std::to_string(n) + "x" +
                              std::to_string(view_dims_[v]));
        }
    }
    const bool supervised = sup.labels != nullptr;
    if (supervised) {
        if (sup.label_mask == nullptr || sup.labels->rows() != n ||
            sup.labels->cols() != num_labels_ || !sup.labels->same_shape(*sup.label_mask)) {
            throw ConfigError("supervision must be two N x C matrices");
        }
    }
    if (cfg_.use_s3 && (q.rows() != num_labels_ || q.cols() != num_labels_)) {
        throw ConfigError("co-occurrence matrix must be C x C, got " + q.shape_string());
    }

    std::optional<RngStream> label_noise, shift_noise;
    std::vector<RngStream> channel_noise;
    if (opts.noise != nullptr) {
        label_noise = opts.noise->fork(kLabelNoise);
        shift_noise = opts.noise->fork(kShiftNoise);
        for (std::size_t k = 0; k < 2 * nv; ++k)
            channel_noise.push_back(opts.noise->fork(kChannelNoise + k));
    }
    const auto channel_rng = [&](std::size_t k) -> RngStream* {
        return channel_noise.empty() ? nullptr : &channel_noise[k];
    };

    ForwardResult res;
    LossComponents parts;
    std::vector<Var> inputs, reps_s, reps_p;
    for (const Matrix& x : views) inputs.push_back(tape.constant(x));

    if (cfg_.use_s2) {
        std::vector<ChannelOutput> shared, priv;
        for (std::size_t v = 0; v < nv; ++v) {
            shared.push_back(encode_channel(tape, shared_enc_[v], inputs[v], channel_rng(2 * v)));
            priv.push_back(encode_channel(tape, priv_enc_[v], inputs[v], channel_rng(2 * v + 1)));
            reps_s.push_back(shared[v].fused);
            reps_p.push_back(priv[v].fused);
        }
        if (supervised) {
            parts.re = reconstruction_loss(tape, shared_enc_, priv_enc_, shared, priv, inputs);
            res.re = parts.re.scalar();
        }
        if (supervised && shift_noise) {
            const DisentangleTerms dt = disentangle_loss(
                tape, shared, priv, scorer_, {cfg_.gamma, cfg_.beta}, *shift_noise);
            parts.dis = dt.loss;
            res.dis = dt.loss.scalar();
            res.jsd = dt.mean_jsd;
            res.overlap = dt.mean_overlap;
        }
    } else {
        for (std::size_t v = 0; v < nv; ++v) reps_s.push_back(single_enc_[v](tape, inputs[v]));
    }

    if (cfg_.use_s3) {
        const LabelEmbeddings le =
            label_embeddings(tape, protos_, q, label_noise ? &*label_noise : nullptr);
        const Var l = le.embeddings;
        const bool need_manifold = supervised || opts.frozen == nullptr;

        std::vector<Var> pseudo, manifold;
        std::vector<double> loss_s, loss_p;
        const auto stream = [&](ClassHeads& heads, Var rep, std::vector<double>& losses) {
            const Var u = pseudo_predict(tape, heads, l, rep);
            pseudo.push_back(u);
            if (!need_manifold) return;
            const Var m = manifold_loss(tape, ad::row_normalize(rep), ad::row_normalize(u));
            manifold.push_back(m);
            losses.push_back(m.scalar());
        };
        for (std::size_t v = 0; v < nv; ++v) stream(shared_heads_[v], reps_s[v], loss_s);
        for (std::size_t v = 0; v < reps_p.size(); ++v) stream(priv_heads_[v], reps_p[v], loss_p);

        if (opts.frozen != nullptr) {
            res.fusion = *opts.frozen;
        } else {
            res.fusion.shared = fusion_weights(loss_s);
            if (!loss_p.empty()) res.fusion.priv = fusion_weights(loss_p);
        }
        Var z = weighted_views(reps_s, res.fusion.shared);
        if (cfg_.use_s2) z = gate_fuse(z, weighted_views(reps_p, res.fusion.priv));
        res.prediction = pseudo_predict(tape, final_heads_, l, z);

        if (supervised) {
            Var pm, gm;
            for (const Var& u : pseudo) {
                const Var ce = masked_ce(tape, u, *sup.labels, *sup.label_mask);
                pm = pm.valid() ? ad::add(pm, ce) : ce;
            }
            for (const Var& m : manifold) gm = gm.valid() ? ad::add(gm, m) : m;
            parts.pmce = ad::scale(pm, 1.0 / static_cast<double>(pseudo.size()));
            parts.gc = ad::scale(gm, kManifoldScale / static_cast<double>(manifold.size()));
            res.pmce = parts.pmce.scalar();
            res.gc = parts.gc.scalar();
        }
    } else {
        std::vector<Var> all = reps_s;
        all.insert(all.end(), reps_p.begin(), reps_p.end());
        const Var z = fuse_(tape, ad::concat_cols(all));
        res.prediction =
            ad::clamp(ad::sigmoid(head_(tape, z)), kProbClamp, 1.0 - kProbClamp);
    }

    if (supervised) {
        parts.mce = masked_ce(tape, res.prediction, *sup.labels, *sup.label_mask);
        res.mce = parts.mce.scalar();
        res.total = total_loss(tape, parts, {cfg_.alpha, cfg_.lambda1, cfg_.lambda2});
    }
    return res;
}

Matrix AdrlModel::predict(std::span<const Matrix> views, const Matrix& q) {
    if (cfg_.use_s3 && fusion.shared.empty()) {
        throw ConfigError("model has no fusion weights; train it before predicting");
    }
    Tape tape;
    ForwardOptions opts;
    opts.frozen = &fusion;
    return forward(tape, views, q, {}, opts).prediction.value();
}

AdrlModel::Snapshot AdrlModel::snapshot() {
    Snapshot s;
    for (Parameter* p : parameters()) s.values.push_back(p->value);
    s.fusion = fusion;
    return s;
}

void AdrlModel::restore(const Snapshot& s) {
    const auto params = parameters();
    if (params.size() != s.values.size()) throw ConfigError("snapshot does not match model");
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = s.values[k];
    fusion = s.fusion;
}

nlohmann::json AdrlModel::to_json() {
    nlohmann::json j;
    j["config"] = cfg_.to_json();
    j["view_dims"] = view_dims_;
    j["num_labels"] = num_labels_;
    j["fusion"] = {{"shared", fusion.shared}, {"private", fusion.priv}};
    nlohmann::json params = nlohmann::json::object();
    for (Parameter* p : parameters()) params[p->name()] = matrix_json(p->value);
    j["parameters"] = std::move(params);
    return j;
}

AdrlModel AdrlModel::from_json(const nlohmann::json& j) {
    try {
        AdrlModel m(j.at("view_dims").get<std::vector<std::size_t>>(),
                    j.at("num_labels").get<std::size_t>(),
                    TrainConfig::from_json(j.at("config")));
        m.fusion.shared = j.at("fusion").at("shared").get<std::vector<double>>();
        m.fusion.priv = j.at("fusion").at("private").get<std::vector<double>>();
        const auto& params = j.at("parameters");
        for (Parameter* p : m.parameters()) {
            Matrix v = matrix_from_json(params.at(p->name()));
            if (!v.same_shape(p->value)) {
                throw ConfigError("parameter " + p->name() + " has shape " + v.shape_string() +
                                  ", expected " + p->value.shape_string());
            }
            p->value = std::move(v);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model json: ") + e.what());
    }
}

}  // namespace adrl
