#include "adrl/labelgraph.hpp"

#include <string>

#include "adrl/disentangle.hpp"
#include "adrl/error.hpp"
#include "adrl/optim.hpp"

namespace adrl {

Matrix cooccurrence(const Matrix& y, const Matrix& g, std::span<const std::size_t> rows) {
    if (!y.same_shape(g)) throw ConfigError("cooccurrence: label/mask shape mismatch");
    const std::size_t c = y.cols();
    Matrix num(c, c);
    std::vector<double> den(c, 0.0);
    for (std::size_t k : rows) {
        for (std::size_t i = 0; i < c; ++i) {
            const double yi = y(k, i) * g(k, i);
            if (yi == 0.0) continue;
            den[i] += yi;
            for (std::size_t j = 0; j < c; ++j) num(i, j) += yi * y(k, j) * g(k, j);
        }
    }
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) num(i, j) = den[i] > 0.0 ? num(i, j) / den[i] : 0.0;
    return num;
}

Matrix neighbor_mask(const Matrix& q) {
    Matrix m(q.rows(), q.cols());
    for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = 0; j < q.cols(); ++j) m(i, j) = (i == j || q(i, j) > 0.0) ? 1.0 : 0.0;
    return m;
}

GraphAttention::GraphAttention(std::size_t dim, std::size_t num_heads, double slope_,
                               RngStream& rng)
    : attn("gat.attn", init_uniform(dim, 2, 2 * dim, rng)),
      projection("gat.proj", init_uniform(dim, dim, dim, rng)),
      slope(slope_) {
    if (num_heads < 1) throw ConfigError("graph attention needs at least one head");
    for (std::size_t k = 0; k < num_heads; ++k) {
        heads.emplace_back("gat.head" + std::to_string(k), init_uniform(dim, dim, dim, rng));
    }
}

void GraphAttention::collect(std::vector<Parameter*>& out) {
    out.push_back(&attn);
    out.push_back(&projection);
    for (Parameter& h : heads) out.push_back(&h);
}

GatOutput gat_refine(Tape& tape, GraphAttention& gat, Var z, const Matrix& q) {
    const std::size_t c = z.rows();
    if (q.rows() != c || q.cols() != c) throw ConfigError("gat_refine: Q must be C x C");
    const Var projected = ad::matmul(z, tape.param(gat.projection));
    const Var scores = ad::matmul(projected, tape.param(gat.attn));  // C x 2
    const Var centre = ad::matmul(scores, tape.constant(Matrix{{1.0}, {0.0}}));
    const Var neigh = ad::transpose(ad::matmul(scores, tape.constant(Matrix{{0.0}, {1.0}})));
    const Var logits = ad::leaky_relu(ad::outer_add(centre, neigh), gat.slope);
    const Var alpha = ad::masked_row_softmax(logits, neighbor_mask(q));

    Var agg;
    for (Parameter& head : gat.heads) {
        const Var h = ad::matmul(alpha, ad::matmul(z, tape.param(head)));
        agg = agg.valid() ? ad::add(agg, h) : h;
    }
    agg = ad::scale(agg, 1.0 / static_cast<double>(gat.heads.size()));
    return {ad::leaky_relu(agg, gat.slope), alpha};
}

LabelPrototypes::LabelPrototypes(std::size_t num_labels, std::size_t dim, std::size_t num_heads,
                                 double slope, RngStream& rng)
    : seeds("label.seeds", Matrix::identity(num_labels)),
      mean_enc("label.mean", num_labels, dim, rng),
      var_enc("label.var", num_labels, dim, rng),
      gat(dim, num_heads, slope, rng) {}

void LabelPrototypes::collect(std::vector<Parameter*>& out) {
    out.push_back(&seeds);
    mean_enc.collect(out);
    var_enc.collect(out);
    gat.collect(out);
}

Var sample_label_embeddings(Tape& tape, Var refined_mean, Var refined_var, RngStream* noise) {
    if (noise == nullptr) return refined_mean;
    Matrix eps(refined_mean.rows(), refined_mean.cols());
    for (double& e : eps.data()) e = noise->normal();
    return ad::add(refined_mean, ad::mul(tape.constant(std::move(eps)), ad::sqrt(refined_var)));
}

LabelEmbeddings label_embeddings(Tape& tape, LabelPrototypes& protos, const Matrix& q,
                                 RngStream* noise) {
    LabelEmbeddings out;
    const Var seeds = tape.param(protos.seeds);
    out.mean = protos.mean_enc(tape, seeds);
    out.var = ad::affine(ad::softplus(protos.var_enc(tape, seeds)), 1.0, kVarianceFloor);
    const GatOutput gm = gat_refine(tape, protos.gat, out.mean, q);
    const GatOutput gv = gat_refine(tape, protos.gat, out.var, q);
    out.refined_mean = gm.refined;
    out.refined_var = ad::affine(ad::softplus(gv.refined), 1.0, kVarianceFloor);
    out.mean_attention = gm.attention;
    out.var_attention = gv.attention;
    out.embeddings = sample_label_embeddings(tape, out.refined_mean, out.refined_var, noise);
    return out;
}

}  // namespace adrl
