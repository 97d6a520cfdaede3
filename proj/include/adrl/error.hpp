#pragma once

#include <stdexcept>
#include <string>

namespace adrl {

/// Invalid arguments, shape mismatches, malformed files. The CLI maps these
/// to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A non-finite value appeared during training. Carries the op (or loss
/// component) that produced it. The CLI maps these to exit code 2.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::string where, const std::string& what)
        : std::runtime_error(what), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace adrl
