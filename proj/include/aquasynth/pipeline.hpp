#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "aquasynth/color.hpp"
#include "aquasynth/depth.hpp"
#include "aquasynth/errors.hpp"
#include "aquasynth/field.hpp"
#include "aquasynth/image.hpp"
#include "aquasynth/optics.hpp"
#include "aquasynth/spectra.hpp"
#include "aquasynth/spectral_io.hpp"

namespace aquasynth {

enum class Mode { Reference, Proposed };

inline std::string_view to_string(Mode m) { return m == Mode::Reference ? "reference" : "proposed"; }

inline std::optional<Mode> parse_mode(std::string_view s) {
    if (s == "reference") return Mode::Reference;
    if (s == "proposed") return Mode::Proposed;
    return std::nullopt;
}

/// Hand-picked channel attenuation that bypasses the spectral collapse.
/// Without `backlight`, the veil is b_c E_c / beta with b_c and E_c taken from
/// the selected water type; without `scattering`, b_c comes from the water type.
struct CoefficientOverride {
    Rgb beta{};
    std::optional<Rgb> backlight;
    std::optional<Rgb> scattering;
};

struct DegradationConfig {
    std::string water = "5C";
    Mode mode = Mode::Proposed;
    double vertical_depth = 1.0; // d, meters below the surface
    DepthScaling scaling{};
    double g = 0.2;
    double mu = 0.3;
    double phi_factor = 0.3;     // phi = phi_factor * mean collapsed b
    double px_per_unit = 1.0;    // blur sigma in pixels per unit of phi z
    bool field_enabled = true;
    FieldConfig field{};         // seed is taken from `seed`
    std::optional<CoefficientOverride> coefficient_override;
    std::optional<std::filesystem::path> illuminant;
    std::uint64_t seed = 0;

    void validate() const {
        if (!is_jerlov_type(water)) throw ConfigError("water", "unknown Jerlov type '" + water + "'");
        if (!(vertical_depth >= 0.0) || !std::isfinite(vertical_depth))
            throw ConfigError("params.d", "must be finite and >= 0");
        if (!(g > 0.0 && g <= 1.0)) throw ConfigError("params.g", "must lie in (0, 1]");
        if (!(mu > 0.0 && mu <= 1.0)) throw ConfigError("params.mu", "must lie in (0, 1]");
        if (!(phi_factor >= 0.0) || !std::isfinite(phi_factor))
            throw ConfigError("params.phi_factor", "must be finite and >= 0");
        if (!(px_per_unit > 0.0) || !std::isfinite(px_per_unit))
            throw ConfigError("params.px_per_unit", "must be finite and > 0");
        if (!std::isfinite(scaling.z_min) || !(scaling.z_min >= 0.0))
            throw ConfigError("params.z_min", "must be finite and >= 0");
        if (!std::isfinite(scaling.z_max) || !(scaling.z_max > scaling.z_min))
            throw ConfigError("params.z_max", "must be finite and > z_min");
        if (!(scaling.gamma > 0.0) || !std::isfinite(scaling.gamma))
            throw ConfigError("params.gamma", "must be finite and > 0");
        if (!(field.exponent > 0.0) || !std::isfinite(field.exponent))
            throw ConfigError("params.field.exponent", "must be finite and > 0");
        if (!(field.lo > 0.0 && field.lo <= 1.0)) throw ConfigError("params.field.lo", "must lie in (0, 1]");
        if (!(field.hi >= 1.0) || !std::isfinite(field.hi) || !(field.hi > field.lo))
            throw ConfigError("params.field.hi", "must be finite, >= 1 and > lo");
        if (coefficient_override) {
            const auto& o = *coefficient_override;
            for (std::size_t c = 0; c < 3; ++c) {
                if (!(o.beta[c] > 0.0) || !std::isfinite(o.beta[c]))
                    throw ConfigError("params.coefficient_override.beta", "entries must be finite and > 0");
                if (o.backlight && !((*o.backlight)[c] >= 0.0 && (*o.backlight)[c] <= 1.0))
                    throw ConfigError("params.coefficient_override.backlight", "entries must lie in [0, 1]");
                if (o.scattering && !((*o.scattering)[c] >= 0.0 && (*o.scattering)[c] <= o.beta[c]))
                    throw ConfigError("params.coefficient_override.scattering", "entries must lie in [0, beta]");
            }
        }
    }
};

/// Per-image channel scalars plus the blur constant derived from them.
struct ResolvedCoefficients {
    ChannelCoefficients channels;
    double phi = 0.0;
};

namespace detail {

inline ChannelCoefficients collapse_for(const DegradationConfig& cfg, const SpectralLibrary& lib) {
    std::optional<SpectralCurve> surface;
    if (cfg.illuminant) surface = lib.load_illuminant(*cfg.illuminant);
    return effective_coefficients(lib.water(cfg.water), lib.camera(), cfg.vertical_depth, cfg.g, cfg.mu, surface);
}

inline ChannelCoefficients apply_override(const DegradationConfig& cfg, const SpectralLibrary* lib) {
    const auto& o = *cfg.coefficient_override;
    const bool needs_library = !o.scattering || !o.backlight;
    std::optional<ChannelCoefficients> spectral;
    Rgb ambient{1.0, 1.0, 1.0};
    if (needs_library) {
        if (!lib)
            throw ConfigError("params.coefficient_override",
                              "scattering and backlight must be given when no spectral data is loaded");
        spectral = collapse_for(cfg, *lib);
        std::optional<SpectralCurve> surface;
        if (cfg.illuminant) surface = lib->load_illuminant(*cfg.illuminant);
        const auto& water = lib->water(cfg.water);
        const SpectralCurve e0 = surface ? *surface : SpectralCurve::constant(lib->grid(), 1.0);
        ambient = channel_radiance(ambient_light(e0, water.diffuse_downwelling, cfg.vertical_depth), lib->camera(), e0);
    }

    ChannelCoefficients out;
    out.beta_D = o.beta;
    out.beta_B = o.beta;
    for (std::size_t c = 0; c < 3; ++c) {
        const double b = o.scattering ? (*o.scattering)[c] : std::min(spectral->scattering[c], o.beta[c]);
        out.scattering[c] = b;
        out.G_c[c] = std::max(o.beta[c] - (1.0 - cfg.g) * b, 0.0);
        out.G_B[c] = out.G_c[c];
        const double ref = o.backlight ? (*o.backlight)[c] : b * ambient[c] / o.beta[c];
        out.backlight[c] = std::clamp(ref, 0.0, 1.0);
        // Same ratio as mu b E / G against b E / beta.
        const double scaled = out.G_c[c] > 0.0 ? ref * cfg.mu * o.beta[c] / out.G_c[c] : 0.0;
        out.backlight_scaled[c] = std::clamp(scaled, 0.0, 1.0);
    }
    return out;
}

inline void require_finite(const ColorImage& img, const char* term) {
    for (double v : img.values())
        if (!std::isfinite(v)) throw NumericalFault(std::string("non-finite value in ") + term + " term");
}

} // namespace detail

/// Channel coefficients for one configuration. `lib` may be null only when a
/// fully specified override makes spectral data unnecessary.
inline ResolvedCoefficients resolve_coefficients(const DegradationConfig& cfg, const SpectralLibrary* lib) {
    ResolvedCoefficients r;
    if (cfg.coefficient_override) {
        r.channels = detail::apply_override(cfg, lib);
    } else {
        if (!lib) throw ConfigError("water", "spectral data is required without a coefficient override");
        r.channels = detail::collapse_for(cfg, *lib);
    }
    r.phi = cfg.phi_factor * r.channels.mean_scattering();
    return r;
}

/// Mean and maximum of one term.
struct TermSummary {
    double mean = 0.0;
    double max = 0.0;
};

struct Rendering {
    TermStack terms;
    ColorImage unclamped;  // D + F + B
    ColorImage image;      // clamped to [0, 1], linear light
    Plane depth;           // path length actually used (after field modulation)
    ResolvedCoefficients coefficients;
    TermSummary direct, forward, backscatter;
};

inline TermSummary summarize(const ColorImage& term) {
    return {mean_of(term.values()), max_of(term.values())};
}

/// Metric path length used for rendering: the scene depth, times the random
/// field in proposed mode when the field is enabled.
inline Plane effective_depth(const Plane& depth, const DegradationConfig& cfg) {
    if (cfg.mode != Mode::Proposed || !cfg.field_enabled) return depth;
    FieldConfig fc = cfg.field;
    fc.seed = cfg.seed;
    return modulate_depth(depth, generate_grf(depth.height(), depth.width(), fc));
}

/// Evaluates I = D + F + B on a linear-light scene with metric depth.
inline Rendering term_report(const ScenePair& scene, const DegradationConfig& cfg, const SpectralLibrary* lib) {
    cfg.validate();
    scene.validate();

    Rendering out;
    out.coefficients = resolve_coefficients(cfg, lib);
    const auto& k = out.coefficients.channels;
    out.depth = effective_depth(scene.depth, cfg);
    const ScenePair medium{scene.radiance, out.depth};

    out.terms.direct = direct_transmission(medium, k.beta_D);
    if (cfg.mode == Mode::Proposed) {
        out.terms.forward = forward_scatter(medium, k.G_c, k.beta_D, out.coefficients.phi, cfg.px_per_unit);
        out.terms.backscatter = backscatter(out.depth, k.backlight_scaled, k.G_B);
    } else {
        out.terms.forward = make_color(scene.depth.height(), scene.depth.width(), 0.0);
        out.terms.backscatter = backscatter(out.depth, k.backlight, k.beta_B);
    }
    detail::require_finite(out.terms.direct, "direct");
    detail::require_finite(out.terms.forward, "forward");
    detail::require_finite(out.terms.backscatter, "backscatter");

    out.unclamped = out.terms.sum();
    out.image = out.unclamped;
    for (double& v : out.image.values()) v = std::clamp(v, 0.0, 1.0);

    out.direct = summarize(out.terms.direct);
    out.forward = summarize(out.terms.forward);
    out.backscatter = summarize(out.terms.backscatter);
    return out;
}

/// Linear-light degraded image, clamped to [0, 1].
inline ColorImage synthesize(const ScenePair& scene, const DegradationConfig& cfg, const SpectralLibrary* lib) {
    return term_report(scene, cfg, lib).image;
}

/// Full pipeline on a gamma-encoded image and a relative depth map:
/// decode, scale depth, render, re-encode.
inline ColorImage synthesize_encoded(const ColorImage& encoded, const Plane& relative_depth,
                                     const DegradationConfig& cfg, const SpectralLibrary* lib) {
    cfg.validate();
    const ScenePair scene{decode_srgb(encoded), scale_depth(relative_depth, cfg.scaling)};
    return encode_srgb(synthesize(scene, cfg, lib));
}

/// Reference and proposed renderings of the same scene. Both share the depth
/// mapping; the proposed branch draws its field from cfg.seed.
inline std::pair<ColorImage, ColorImage> synthesize_pair(const ScenePair& scene, const DegradationConfig& cfg,
                                                         const SpectralLibrary* lib) {
    DegradationConfig ref = cfg, prop = cfg;
    ref.mode = Mode::Reference;
    prop.mode = Mode::Proposed;
    return {synthesize(scene, ref, lib), synthesize(scene, prop, lib)};
}

} // namespace aquasynth
