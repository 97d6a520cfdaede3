#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "adrl/autodiff.hpp"
#include "adrl/rng.hpp"

namespace adrl {

/// x * weight + bias, weight is in x out.
struct Affine {
    Affine() = default;
    Affine(const std::string& name, std::size_t in, std::size_t out, RngStream& rng);

    Var operator()(Tape& tape, Var x);
    void collect(std::vector<Parameter*>& out);

    Parameter weight;
    Parameter bias;
};

/// Two affine layers with a ReLU between.
struct Mlp2 {
    Mlp2() = default;
    Mlp2(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out,
         RngStream& rng);

    Var operator()(Tape& tape, Var x);
    void collect(std::vector<Parameter*>& out);

    Affine first;
    Affine second;
};

}  // namespace adrl
