#include "adrl/layers.hpp"

#include "adrl/optim.hpp"

namespace adrl {

Affine::Affine(const std::string& name, std::size_t in, std::size_t out, RngStream& rng)
    : weight(name + ".weight", init_uniform(in, out, in, rng)),
      bias(name + ".bias", init_uniform(1, out, in, rng)) {}

Var Affine::operator()(Tape& tape, Var x) {
    return ad::add_row(ad::matmul(x, tape.param(weight)), tape.param(bias));
}

void Affine::collect(std::vector<Parameter*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

Mlp2::Mlp2(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out,
           RngStream& rng)
    : first(name + ".0", in, hidden, rng), second(name + ".1", hidden, out, rng) {}

Var Mlp2::operator()(Tape& tape, Var x) { return second(tape, ad::relu(first(tape, x))); }

void Mlp2::collect(std::vector<Parameter*>& out) {
    first.collect(out);
    second.collect(out);
}

}  // namespace adrl
