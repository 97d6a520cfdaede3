#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace adrl {

enum class Variant { full, no_s1, no_s2, no_s3 };

Variant parse_variant(std::string_view name);
std::string_view variant_name(Variant v);

/// Every knob of a training run. Text form is one `key = value` per line;
/// `#` starts a comment. Keys are the field names below.
struct TrainConfig {
    // loss weights
    double alpha = 1.0;
    double lambda1 = 0.1;
    double lambda2 = 0.01;
    double gamma = 0.01;
    double beta = 0.01;
    // imputation
    double tau = 0.5;
    double percentile = 90.0;
    std::size_t k = 10;
    double fragment_fraction = 0.1;
    // architecture
    std::size_t d = 64;
    std::size_t hidden = 128;
    std::size_t heads = 4;
    double leaky_slope = 0.2;
    // optimization
    double lr = 1.0;
    std::size_t epochs = 200;
    std::size_t patience = 50;  // 0 disables early stopping
    std::uint64_t seed = 0;
    // ablation switches
    bool use_s1 = true;
    bool use_s2 = true;
    bool use_s3 = true;
    // incomplete-data protocol
    std::size_t repetitions = 5;
    double fmr = 0.5;
    double lmr = 0.5;
    std::array<double, 3> ratios{7.0, 1.0, 2.0};

    /// Throws ConfigError on the first out-of-range field.
    void validate() const;

    /// Sets one field from its text form; unknown keys throw ConfigError.
    void set(std::string_view key, std::string_view value);
    static std::vector<std::string> keys();

    Variant variant() const;
    TrainConfig with_variant(Variant v) const;

    std::string to_text() const;
    static TrainConfig from_text(std::string_view text);
    static TrainConfig load(const std::filesystem::path& path);

    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);

    bool operator==(const TrainConfig&) const = default;
};

/// "7:1:2" -> {7, 1, 2}
std::array<double, 3> parse_ratios(std::string_view text);
std::string format_ratios(const std::array<double, 3>& r);

}  // namespace adrl
