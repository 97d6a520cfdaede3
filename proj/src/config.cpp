#include "adrl/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "adrl/error.hpp"

namespace adrl {

Variant parse_variant(std::string_view name) {
    if (name == "full") return Variant::full;
    if (name == "no_S1" || name == "no_s1") return Variant::no_s1;
    if (name == "no_S2" || name == "no_s2") return Variant::no_s2;
    if (name == "no_S3" || name == "no_s3") return Variant::no_s3;
    throw ConfigError("unknown variant '" + std::string(name) +
                      "' (expected full, no_S1, no_S2 or no_S3)");
}

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_s1: return "no_S1";
        case Variant::no_s2: return "no_S2";
        case Variant::no_s3: return "no_S3";
    }
    return "full";
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" + t + "'");
    }
    return v;
}

std::uint64_t to_uint(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError("config: '" + std::string(key) + "' expects a non-negative integer, got '" +
                          t + "'");
    }
    return v;
}

bool to_bool(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    if (t == "1" || t == "true") return true;
    if (t == "0" || t == "false") return false;
    throw ConfigError("config: '" + std::string(key) + "' expects true/false, got '" + t + "'");
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Field {
    std::function<void(TrainConfig&, std::string_view)> set;
    std::function<std::string(const TrainConfig&)> get;
};

#define ADRL_DOUBLE(name)                                                              \
    {#name, Field{[](TrainConfig& c, std::string_view v) { c.name = to_double(#name, v); }, \
                  [](const TrainConfig& c) { return fmt_double(c.name); }}}
#define ADRL_UINT(name)                                                                       \
    {#name, Field{[](TrainConfig& c, std::string_view v) {                                   \
                      c.name = static_cast<decltype(c.name)>(to_uint(#name, v));              \
                  },                                                                          \
                  [](const TrainConfig& c) { return std::to_string(c.name); }}}
#define ADRL_BOOL(name)                                                              \
    {#name, Field{[](TrainConfig& c, std::string_view v) { c.name = to_bool(#name, v); }, \
                  [](const TrainConfig& c) { return std::string(c.name ? "true" : "false"); }}}

const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> table = {
        ADRL_DOUBLE(alpha),
        ADRL_DOUBLE(lambda1),
        ADRL_DOUBLE(lambda2),
        ADRL_DOUBLE(gamma),
        ADRL_DOUBLE(beta),
        ADRL_DOUBLE(tau),
        ADRL_DOUBLE(percentile),
        ADRL_UINT(k),
        ADRL_DOUBLE(fragment_fraction),
        ADRL_UINT(d),
        ADRL_UINT(hidden),
        ADRL_UINT(heads),
        ADRL_DOUBLE(leaky_slope),
        ADRL_DOUBLE(lr),
        ADRL_UINT(epochs),
        ADRL_UINT(patience),
        ADRL_UINT(seed),
        ADRL_BOOL(use_s1),
        ADRL_BOOL(use_s2),
        ADRL_BOOL(use_s3),
        ADRL_UINT(repetitions),
        ADRL_DOUBLE(fmr),
        ADRL_DOUBLE(lmr),
        {"ratios", Field{[](TrainConfig& c, std::string_view v) { c.ratios = parse_ratios(v); },
                         [](const TrainConfig& c) { return format_ratios(c.ratios); }}},
    };
    return table;
}

#undef ADRL_DOUBLE
#undef ADRL_UINT
#undef ADRL_BOOL

}  // namespace

std::array<double, 3> parse_ratios(std::string_view text) {
    std::array<double, 3> r{};
    std::size_t k = 0;
    std::string_view rest = text;
    while (true) {
        const auto colon = rest.find(':');
        if (k >= 3) throw ConfigError("ratios must have three parts, e.g. 7:1:2");
        r[k++] = to_double("ratios", rest.substr(0, colon));
        if (colon == std::string_view::npos) break;
        rest = rest.substr(colon + 1);
    }
    if (k != 3) throw ConfigError("ratios must have three parts, e.g. 7:1:2");
    return r;
}

std::string format_ratios(const std::array<double, 3>& r) {
    std::string out;
    for (std::size_t k = 0; k < 3; ++k) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", r[k]);
        out += (k ? ":" : "") + std::string(buf);
    }
    return out;
}

void TrainConfig::validate() const {
    const auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    need(lr > 0.0, "lr must be > 0");
    need(epochs >= 1, "epochs must be >= 1");
    need(alpha >= 0 && lambda1 >= 0 && lambda2 >= 0, "loss weights must be >= 0");
    need(gamma >= 0 && beta >= 0, "gamma and beta must be >= 0");
    need(tau > 0.0, "tau must be > 0");
    need(percentile >= 0.0 && percentile < 100.0, "percentile must be in [0, 100)");
    need(k >= 1, "k must be >= 1");
    need(fragment_fraction >= 0.0 && fragment_fraction < 1.0,
         "fragment_fraction must be in [0, 1)");
    need(d >= 1 && hidden >= 1, "d and hidden must be >= 1");
    need(heads >= 1, "heads must be >= 1");
    need(leaky_slope >= 0.0, "leaky_slope must be >= 0");
    need(fmr >= 0.0 && fmr < 1.0, "fmr must be < 1");
    need(lmr >= 0.0 && lmr < 1.0, "lmr must be in [0, 1)");
    need(ratios[0] >= 0 && ratios[1] >= 0 && ratios[2] >= 0 &&
             ratios[0] + ratios[1] + ratios[2] > 0,
         "ratios must be non-negative and not all zero");
}

void TrainConfig::set(std::string_view key, std::string_view value) {
    const auto& table = fields();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    it->second.set(*this, value);
}

std::vector<std::string> TrainConfig::keys() {
    std::vector<std::string> out;
    for (const auto& [k, f] : fields()) out.push_back(k);
    return out;
}

Variant TrainConfig::variant() const {
    if (!use_s1) return Variant::no_s1;
    if (!use_s2) return Variant::no_s2;
    if (!use_s3) return Variant::no_s3;
    return Variant::full;
}

TrainConfig TrainConfig::with_variant(Variant v) const {
    TrainConfig c = *this;
    c.use_s1 = v != Variant::no_s1;
    c.use_s2 = v != Variant::no_s2;
    c.use_s3 = v != Variant::no_s3;
    return c;
}

std::string TrainConfig::to_text() const {
    std::string out;
    for (const auto& [k, f] : fields()) out += k + " = " + f.get(*this) + "\n";
    return out;
}

TrainConfig TrainConfig::from_text(std::string_view text) {
    TrainConfig c;
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        c.set(trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
    }
    return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return from_text(ss.str());
}

nlohmann::json TrainConfig::to_json() const {
    nlohmann::json j;
    j["alpha"] = alpha;
    j["lambda1"] = lambda1;
    j["lambda2"] = lambda2;
    j["gamma"] = gamma;
    j["beta"] = beta;
    j["tau"] = tau;
    j["percentile"] = percentile;
    j["k"] = k;
    j["fragment_fraction"] = fragment_fraction;
    j["d"] = d;
    j["hidden"] = hidden;
    j["heads"] = heads;
    j["leaky_slope"] = leaky_slope;
    j["lr"] = lr;
    j["epochs"] = epochs;
    j["patience"] = patience;
    j["seed"] = seed;
    j["use_s1"] = use_s1;
    j["use_s2"] = use_s2;
    j["use_s3"] = use_s3;
    j["repetitions"] = repetitions;
    j["fmr"] = fmr;
    j["lmr"] = lmr;
    j["ratios"] = ratios;
    return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    try {
        c.alpha = j.at("alpha");
        c.lambda1 = j.at("lambda1");
        c.lambda2 = j.at("lambda2");
        c.gamma = j.at("gamma");
        c.beta = j.at("beta");
        c.tau = j.at("tau");
        c.percentile = j.at("percentile");
        c.k = j.at("k");
        c.fragment_fraction = j.at("fragment_fraction");
        c.d = j.at("d");
        c.hidden = j.at("hidden");
        c.heads = j.at("heads");
        c.leaky_slope = j.at("leaky_slope");
        c.lr = j.at("lr");
        c.epochs = j.at("epochs");
        c.patience = j.at("patience");
        c.seed = j.at("seed");
        c.use_s1 = j.at("use_s1");
        c.use_s2 = j.at("use_s2");
        c.use_s3 = j.at("use_s3");
        c.repetitions = j.at("repetitions");
        c.fmr = j.at("fmr");
        c.lmr = j.at("lmr");
        c.ratios = j.at("ratios");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config json: ") + e.what());
    }
    return c;
}

}  // namespace adrl
