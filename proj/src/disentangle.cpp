#include "adrl/disentangle.hpp"

#include <iostream>

#include "adrl/error.hpp"

namespace adrl {

ChannelEncoder::ChannelEncoder(const std::string& name, std::size_t input_dim, std::size_t hidden,
                               std::size_t dim, RngStream& rng)
    : initial(name + ".init", input_dim, hidden, dim, rng),
      mean(name + ".mean", input_dim, dim, rng),
      var(name + ".var", input_dim, dim, rng),
      decoder(name + ".dec", dim, hidden, input_dim, rng) {}

void ChannelEncoder::collect(std::vector<Parameter*>& out) {
    initial.collect(out);
    mean.collect(out);
    var.collect(out);
    decoder.collect(out);
}

Var precision_fuse(Var sampled, Var initial, Var var) {
    // w*Z2 + (1-w)*Z1 == Z1 + w*(Z2 - Z1)
    return ad::add(initial, ad::mul(ad::precision_weight(var), ad::sub(sampled, initial)));
}

ChannelOutput encode_channel(Tape& tape, ChannelEncoder& enc, Var input, RngStream* noise) {
    ChannelOutput out;
    out.initial = enc.initial(tape, input);
    out.mean = enc.mean(tape, input);
    out.var = ad::affine(ad::softplus(enc.var(tape, input)), 1.0, kVarianceFloor);
    if (noise != nullptr) {
        Matrix eps(out.mean.rows(), out.mean.cols());
        for (double& e : eps.data()) e = noise->normal();
        out.sampled = ad::add(out.mean, ad::mul(tape.constant(std::move(eps)), ad::sqrt(out.var)));
    } else {
        out.sampled = out.mean;
    }
    out.fused = precision_fuse(out.sampled, out.initial, out.var);
    return out;
}

Var jsd_mi_estimate(Tape& tape, Mlp2& scorer, Var a, Var b, RngStream& rng) {
    const std::size_t n = a.rows();
    if (n < 2) throw ConfigError("JSD estimate needs at least two samples");
    if (b.rows() != n) throw ConfigError("JSD estimate: row mismatch");
    const std::size_t offset = 1 + rng.below(n - 1);
    std::vector<std::size_t> shifted(n);
    for (std::size_t i = 0; i < n; ++i) shifted[i] = (i + offset) % n;

    const Var pos_in[] = {a, b};
    const Var neg_in[] = {ad::gather_rows(a, shifted), b};
    const Var pos = scorer(tape, ad::concat_cols(pos_in));
    const Var neg = scorer(tape, ad::concat_cols(neg_in));
    // -log(1 + e^-t) = -softplus(-t);  -log(1 + e^t) = -softplus(t)
    const Var terms = ad::add(ad::mean(ad::softplus(ad::scale(pos, -1.0))),
                              ad::mean(ad::softplus(neg)));
    return ad::scale(terms, -1.0);
}

Var private_overlap_bound(Var z_u, Var mean_u, Var var_u, Var z_v) {
    // The -0.5*log(2*pi) normalizers of both densities cancel.
    const Var log_post = ad::sub(ad::scale(ad::log(var_u), -0.5),
                                 ad::scale(ad::div(ad::square(ad::sub(z_u, mean_u)), var_u), 0.5));
    const Var log_prior = ad::scale(ad::square(z_v), -0.5);
    return ad::mean(ad::sub(log_post, log_prior));
}

DisentangleTerms disentangle_loss(Tape& tape, std::span<const ChannelOutput> shared,
                                  std::span<const ChannelOutput> priv, Mlp2& scorer,
                                  const DisentangleWeights& weights, RngStream& rng) {
    const std::size_t nv = shared.size();
    if (priv.size() != nv) throw ConfigError("disentangle_loss: channel count mismatch");
    DisentangleTerms terms;
    if (nv < 2) {
        std::clog << "warning: disentanglement loss needs two or more views; using 0\n";
        terms.loss = tape.constant(Matrix(1, 1));
        return terms;
    }
    const double pairs = static_cast<double>(nv * (nv - 1));
    Var total;
    for (std::size_t v = 0; v < nv; ++v) {
        for (std::size_t u = 0; u < nv; ++u) {
            if (u == v) continue;
            const Var jsd = jsd_mi_estimate(tape, scorer, shared[u].fused, shared[v].fused, rng);
            const Var overlap = private_overlap_bound(priv[u].sampled, priv[u].mean, priv[u].var,
                                                      priv[v].sampled);
            terms.mean_jsd += jsd.scalar() / pairs;
            terms.mean_overlap += overlap.scalar() / pairs;
            const Var pair = ad::add(ad::scale(jsd, -weights.gamma / pairs),
                                     ad::scale(overlap, weights.beta / pairs));
            total = total.valid() ? ad::add(total, pair) : pair;
        }
    }
    terms.loss = total;
    return terms;
}

Var mse(Var a, Var b) { return ad::mean(ad::square(ad::sub(a, b))); }

Var reconstruction_loss(Tape& tape, std::span<ChannelEncoder> shared_enc,
                        std::span<ChannelEncoder> priv_enc, std::span<const ChannelOutput> shared,
                        std::span<const ChannelOutput> priv, std::span<const Var> inputs) {
    const std::size_t nv = inputs.size();
    if (nv == 0) throw ConfigError("reconstruction_loss: no views");
    Var total;
    for (std::size_t v = 0; v < nv; ++v) {
        const Var rs = mse(shared_enc[v].decoder(tape, shared[v].fused), inputs[v]);
        const Var rp = mse(priv_enc[v].decoder(tape, priv[v].fused), inputs[v]);
        const Var both = ad::add(rs, rp);
        total = total.valid() ? ad::add(total, both) : both;
    }
    return ad::scale(total, 1.0 / static_cast<double>(nv));
}

}  // namespace adrl
