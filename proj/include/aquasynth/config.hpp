#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aquasynth/errors.hpp"
#include "aquasynth/pipeline.hpp"
#include "aquasynth/spectra.hpp"

#ifndef AQUASYNTH_VERSION
#define AQUASYNTH_VERSION "0.0.0"
#endif

namespace aquasynth {

using json = nlohmann::json;

inline constexpr std::string_view kVersion = AQUASYNTH_VERSION;

enum class PairAssignment { Cross, Split };

/// Everything a batch run needs, with paths already resolved.
struct BatchConfig {
    std::filesystem::path input_dir;
    std::filesystem::path depth_dir;
    std::filesystem::path output_dir;
    int bit_depth = 8;
    std::vector<std::string> water_types{"IA", "IB", "II", "III", "1C", "3C", "5C", "7C", "9C"};
    std::vector<Mode> modes{Mode::Reference, Mode::Proposed};
    DegradationConfig params{};
    std::uint64_t seed = 0;
    PairAssignment pair_assignment = PairAssignment::Cross;
    std::size_t pair_gutter = 8;
    json source;          // config as read, for the manifest
    std::string hash;     // FNV-1a of the canonical config text
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
}

inline const json& require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where, "expected an object");
    return j;
}

inline double get_number(const json& obj, const std::string& key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key, "expected a number");
    return v.get<double>();
}

inline bool get_bool(const json& obj, const std::string& key, const std::string& where, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(where + "." + key, "expected a boolean");
    return v.get<bool>();
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + "." + key, "required");
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(where + "." + key, "expected a string");
    return v.get<std::string>();
}

inline Rgb get_rgb(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(where, "expected an array of 3 numbers");
    Rgb out{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!v[i].is_number()) throw ConfigError(where, "expected an array of 3 numbers");
        out[i] = v[i].get<double>();
    }
    return out;
}

inline std::uint64_t get_seed(const json& v, const std::string& where) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(where, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::filesystem::path resolve_path(const std::filesystem::path& p, const std::filesystem::path& base) {
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace detail

/// Applies a `params` mapping on top of `base`. Unknown keys are errors; every
/// error names its key path (prefixed with "params.").
inline DegradationConfig parse_params(const json& params, DegradationConfig base = {},
                                      const std::filesystem::path& base_dir = {}) {
    using namespace detail;
    const std::string where = "params";
    require_object(params, where);
    reject_unknown_keys(params, where,
                        {"g", "mu", "phi_factor", "d", "z_min", "z_max", "gamma", "px_per_unit", "field",
                         "invert_depth", "coefficient_override", "illuminant", "water", "mode", "seed"});
    DegradationConfig cfg = std::move(base);
    cfg.g = get_number(params, "g", where, cfg.g);
    cfg.mu = get_number(params, "mu", where, cfg.mu);
    cfg.phi_factor = get_number(params, "phi_factor", where, cfg.phi_factor);
    cfg.vertical_depth = get_number(params, "d", where, cfg.vertical_depth);
    cfg.scaling.z_min = get_number(params, "z_min", where, cfg.scaling.z_min);
    cfg.scaling.z_max = get_number(params, "z_max", where, cfg.scaling.z_max);
    cfg.scaling.gamma = get_number(params, "gamma", where, cfg.scaling.gamma);
    cfg.scaling.invert = get_bool(params, "invert_depth", where, cfg.scaling.invert);
    cfg.px_per_unit = get_number(params, "px_per_unit", where, cfg.px_per_unit);
    if (params.contains("water")) cfg.water = get_string(params, "water", where);
    if (params.contains("mode")) {
        const auto m = parse_mode(get_string(params, "mode", where));
        if (!m) throw ConfigError("params.mode", "expected 'reference' or 'proposed'");
        cfg.mode = *m;
    }
    if (params.contains("seed")) cfg.seed = get_seed(params.at("seed"), "params.seed");
    if (params.contains("field")) {
        const std::string fw = "params.field";
        const auto& f = require_object(params.at("field"), fw);
        reject_unknown_keys(f, fw, {"exponent", "lo", "hi", "enabled"});
        cfg.field.exponent = get_number(f, "exponent", fw, cfg.field.exponent);
        cfg.field.lo = get_number(f, "lo", fw, cfg.field.lo);
        cfg.field.hi = get_number(f, "hi", fw, cfg.field.hi);
        cfg.field_enabled = get_bool(f, "enabled", fw, cfg.field_enabled);
    }
    if (params.contains("coefficient_override") && !params.at("coefficient_override").is_null()) {
        const std::string ow = "params.coefficient_override";
        const auto& o = params.at("coefficient_override");
        CoefficientOverride ov;
        if (o.is_array()) {
            ov.beta = get_rgb(o, ow);
        } else {
            require_object(o, ow);
            reject_unknown_keys(o, ow, {"beta", "backlight", "scattering"});
            if (!o.contains("beta")) throw ConfigError(ow + ".beta", "required");
            ov.beta = get_rgb(o.at("beta"), ow + ".beta");
            if (o.contains("backlight")) ov.backlight = get_rgb(o.at("backlight"), ow + ".backlight");
            if (o.contains("scattering")) ov.scattering = get_rgb(o.at("scattering"), ow + ".scattering");
        }
        cfg.coefficient_override = ov;
    }
    if (params.contains("illuminant") && !params.at("illuminant").is_null())
        cfg.illuminant = resolve_path(get_string(params, "illuminant", where), base_dir);
    cfg.validate();
    return cfg;
}

/// Parses a full batch configuration. Relative paths resolve against `base_dir`.
inline BatchConfig parse_batch_config(const json& root, const std::filesystem::path& base_dir) {
    using namespace detail;
    require_object(root, "<root>");
    reject_unknown_keys(root, "", {"input", "output", "water_types", "modes", "params", "seed", "pairs"});

    BatchConfig cfg;
    cfg.source = root;
    cfg.hash = fnv1a_hex(root.dump());

    if (!root.contains("input")) throw ConfigError("input", "required");
    const auto& in = require_object(root.at("input"), "input");
    reject_unknown_keys(in, "input", {"dir", "depth_dir"});
    cfg.input_dir = resolve_path(get_string(in, "dir", "input"), base_dir);
    cfg.depth_dir = in.contains("depth_dir") ? resolve_path(get_string(in, "depth_dir", "input"), base_dir)
                                             : cfg.input_dir;

    if (!root.contains("output")) throw ConfigError("output", "required");
    const auto& out = require_object(root.at("output"), "output");
    reject_unknown_keys(out, "output", {"dir", "bit_depth"});
    cfg.output_dir = resolve_path(get_string(out, "dir", "output"), base_dir);
    if (out.contains("bit_depth")) {
        const auto& b = out.at("bit_depth");
        if (!b.is_number_integer() || (b.get<int>() != 8 && b.get<int>() != 16))
            throw ConfigError("output.bit_depth", "must be 8 or 16");
        cfg.bit_depth = b.get<int>();
    }

    if (root.contains("water_types")) {
        const auto& w = root.at("water_types");
        if (!w.is_array() || w.empty()) throw ConfigError("water_types", "expected a non-empty array");
        cfg.water_types.clear();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const std::string key = "water_types[" + std::to_string(i) + "]";
            if (!w[i].is_string() || !is_jerlov_type(w[i].get<std::string>()))
                throw ConfigError(key, "expected a Jerlov type (I, IA, IB, II, III, 1C, 3C, 5C, 7C, 9C)");
            cfg.water_types.push_back(w[i].get<std::string>());
        }
    }
    if (root.contains("modes")) {
        const auto& m = root.at("modes");
        if (!m.is_array() || m.empty()) throw ConfigError("modes", "expected a non-empty array");
        cfg.modes.clear();
        for (std::size_t i = 0; i < m.size(); ++i) {
            const std::string key = "modes[" + std::to_string(i) + "]";
            const auto parsed = m[i].is_string() ? parse_mode(m[i].get<std::string>()) : std::nullopt;
            if (!parsed) throw ConfigError(key, "expected 'reference' or 'proposed'");
            cfg.modes.push_back(*parsed);
        }
    }
    if (root.contains("seed")) cfg.seed = get_seed(root.at("seed"), "seed");

    DegradationConfig base;
    base.water = cfg.water_types.front();
    cfg.params = root.contains("params") ? parse_params(root.at("params"), base, base_dir) : base;

    if (root.contains("pairs")) {
        const auto& p = require_object(root.at("pairs"), "pairs");
        reject_unknown_keys(p, "pairs", {"assignment", "gutter"});
        if (p.contains("assignment")) {
            const auto a = get_string(p, "assignment", "pairs");
            if (a == "cross") cfg.pair_assignment = PairAssignment::Cross;
            else if (a == "split") cfg.pair_assignment = PairAssignment::Split;
            else throw ConfigError("pairs.assignment", "expected 'cross' or 'split'");
        }
        if (p.contains("gutter")) {
            const auto& g = p.at("gutter");
            if (!g.is_number_unsigned()) throw ConfigError("pairs.gutter", "expected a non-negative integer");
            cfg.pair_gutter = g.get<std::size_t>();
        }
    }
    return cfg;
}

inline BatchConfig load_batch_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    return parse_batch_config(root, std::filesystem::absolute(path).parent_path());
}

inline json coefficients_json(const ResolvedCoefficients& r) {
    const auto arr = [](const Rgb& v) { return json::array({v[0], v[1], v[2]}); };
    return {{"beta_D", arr(r.channels.beta_D)}, {"beta_B", arr(r.channels.beta_B)},
            {"G_c", arr(r.channels.G_c)},       {"G_B", arr(r.channels.G_B)},
            {"backlight", arr(r.channels.backlight)},
            {"backlight_scaled", arr(r.channels.backlight_scaled)},
            {"scattering", arr(r.channels.scattering)}, {"phi", r.phi}};
}

/// Effective parameter block, as recorded per output file.
inline json params_json(const DegradationConfig& c) {
    json j = {{"water", c.water},
              {"mode", std::string(to_string(c.mode))},
              {"d", c.vertical_depth},
              {"z_min", c.scaling.z_min},
              {"z_max", c.scaling.z_max},
              {"gamma", c.scaling.gamma},
              {"invert_depth", c.scaling.invert},
              {"g", c.g},
              {"mu", c.mu},
              {"phi_factor", c.phi_factor},
              {"px_per_unit", c.px_per_unit},
              {"field", {{"enabled", c.field_enabled}, {"exponent", c.field.exponent}, {"lo", c.field.lo}, {"hi", c.field.hi}}},
              {"seed", c.seed}};
    if (c.coefficient_override) {
        const auto arr = [](const Rgb& v) { return json::array({v[0], v[1], v[2]}); };
        json o = {{"beta", arr(c.coefficient_override->beta)}};
        if (c.coefficient_override->backlight) o["backlight"] = arr(*c.coefficient_override->backlight);
        if (c.coefficient_override->scattering) o["scattering"] = arr(*c.coefficient_override->scattering);
        j["coefficient_override"] = o;
    } else {
        j["coefficient_override"] = nullptr;
    }
    j["illuminant"] = c.illuminant ? json(c.illuminant->string()) : json(nullptr);
    return j;
}

} // namespace aquasynth
