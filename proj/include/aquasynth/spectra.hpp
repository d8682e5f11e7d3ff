#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aquasynth/errors.hpp"
#include "aquasynth/image.hpp"

namespace aquasynth {

/// Wavelength-sampled non-negative function. Between samples the curve is
/// linear; outside [front, back] it is undefined.
class SpectralCurve {
public:
    SpectralCurve() = default;

    SpectralCurve(std::vector<double> wavelengths_nm, std::vector<double> values)
        : wavelengths_(std::move(wavelengths_nm)), values_(std::move(values)) {
        if (wavelengths_.size() != values_.size())
            throw DimensionError("SpectralCurve: wavelength and value counts differ");
        if (wavelengths_.size() < 2)
            throw DimensionError("SpectralCurve: at least two samples required");
        for (std::size_t i = 0; i < wavelengths_.size(); ++i) {
            if (!std::isfinite(wavelengths_[i]))
                throw DomainError("SpectralCurve: non-finite wavelength");
            if (i > 0 && !(wavelengths_[i] > wavelengths_[i - 1]))
                throw DomainError("SpectralCurve: wavelengths must be strictly ascending");
            if (!std::isfinite(values_[i]) || values_[i] < 0.0)
                throw DomainError("SpectralCurve: values must be finite and >= 0 (at " +
                                  std::to_string(wavelengths_[i]) + " nm)");
        }
    }

    /// Constant curve over the given grid.
    static SpectralCurve constant(const std::vector<double>& grid, double value) {
        return SpectralCurve(grid, std::vector<double>(grid.size(), value));
    }

    std::span<const double> wavelengths() const noexcept { return wavelengths_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double front() const noexcept { return wavelengths_.front(); }
    double back() const noexcept { return wavelengths_.back(); }

    double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
    double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

    bool shares_grid(const SpectralCurve& other) const noexcept {
        return std::equal(wavelengths_.begin(), wavelengths_.end(), other.wavelengths_.begin(),
                          other.wavelengths_.end());
    }

    /// Linear interpolation at a single wavelength.
    double at(double nm) const {
        if (!(nm >= front() && nm <= back()))
            throw OutOfRangeError("SpectralCurve: " + std::to_string(nm) + " nm outside [" +
                                  std::to_string(front()) + ", " + std::to_string(back()) + "]");
        auto hi = std::lower_bound(wavelengths_.begin(), wavelengths_.end(), nm);
        std::size_t j = static_cast<std::size_t>(hi - wavelengths_.begin());
        if (wavelengths_[j] == nm) return values_[j];
        const double x0 = wavelengths_[j - 1], x1 = wavelengths_[j];
        const double t = (nm - x0) / (x1 - x0);
        return values_[j - 1] + t * (values_[j] - values_[j - 1]);
    }

    friend bool operator==(const SpectralCurve&, const SpectralCurve&) = default;

private:
    std::vector<double> wavelengths_;
    std::vector<double> values_;
};

/// Evenly spaced grid [start, stop] inclusive.
inline std::vector<double> wavelength_grid(double start_nm, double stop_nm, double step_nm) {
    if (!(step_nm > 0.0) || !(stop_nm > start_nm))
        throw DomainError("wavelength_grid: need start < stop and step > 0");
    const auto n = static_cast<std::size_t>(std::llround((stop_nm - start_nm) / step_nm)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = start_nm + step_nm * static_cast<double>(i);
    grid.back() = std::min(grid.back(), stop_nm);
    return grid;
}

/// Default working grid: 400-700 nm at 1 nm.
inline std::vector<double> default_working_grid() { return wavelength_grid(400.0, 700.0, 1.0); }

inline SpectralCurve resample(const SpectralCurve& curve, const std::vector<double>& grid) {
    std::vector<double> out;
    out.reserve(grid.size());
    for (double nm : grid) out.push_back(curve.at(nm));
    return SpectralCurve(grid, std::move(out));
}

namespace detail {

inline void require_shared_grid(const SpectralCurve& a, const SpectralCurve& b, const char* what) {
    if (!a.shares_grid(b))
        throw DimensionError(std::string(what) + ": curves are not on a shared wavelength grid");
}

template <typename Fn>
SpectralCurve pointwise(const SpectralCurve& a, const SpectralCurve& b, Fn fn) {
    require_shared_grid(a, b, "pointwise");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a.values()[i], b.values()[i]);
    return SpectralCurve({a.wavelengths().begin(), a.wavelengths().end()}, std::move(out));
}

/// Trapezoidal integral of f(i) over the grid.
template <typename Fn>
double trapezoid(std::span<const double> grid, Fn f) {
    double sum = 0.0;
    double prev = f(0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = f(i);
        sum += 0.5 * (grid[i] - grid[i - 1]) * (prev + cur);
        prev = cur;
    }
    return sum;
}

} // namespace detail

/// Jerlov optical water classes.
inline constexpr std::array<std::string_view, 10> kJerlovTypes = {
    "I", "IA", "IB", "II", "III", "1C", "3C", "5C", "7C", "9C"};

inline bool is_jerlov_type(std::string_view name) {
    return std::find(kJerlovTypes.begin(), kJerlovTypes.end(), name) != kJerlovTypes.end();
}

/// Inherent optical properties of one water class.
struct WaterType {
    std::string name;
    SpectralCurve absorption;          // a(lambda), 1/m
    SpectralCurve scattering;          // b(lambda), 1/m
    SpectralCurve diffuse_downwelling; // K_d(lambda), 1/m

    /// Beam attenuation a + b.
    SpectralCurve attenuation() const {
        return detail::pointwise(absorption, scattering, [](double a, double b) { return a + b; });
    }

    /// a + g b: attenuation of the combined direct and forward-scattered signal.
    SpectralCurve forward_attenuation(double g) const {
        return detail::pointwise(absorption, scattering, [g](double a, double b) { return a + g * b; });
    }

    WaterType resampled(const std::vector<double>& grid) const {
        return {name, resample(absorption, grid), resample(scattering, grid),
                resample(diffuse_downwelling, grid)};
    }
};

/// Per-channel spectral sensitivity S_c(lambda).
struct CameraResponse {
    std::array<SpectralCurve, 3> channels;

    CameraResponse() = default;
    explicit CameraResponse(std::array<SpectralCurve, 3> rgb) : channels(std::move(rgb)) {
        for (const auto& c : channels) {
            if (!c.shares_grid(channels[0]))
                throw DimensionError("CameraResponse: channels must share a wavelength grid");
            if (!(c.max_value() > 0.0))
                throw DegenerateError("CameraResponse: channel has no positive sample");
        }
    }

    const std::vector<double> grid() const {
        auto w = channels[0].wavelengths();
        return {w.begin(), w.end()};
    }

    CameraResponse resampled(const std::vector<double>& grid) const {
        return CameraResponse({resample(channels[0], grid), resample(channels[1], grid),
                               resample(channels[2], grid)});
    }
};

/// Effective per-channel scalars after spectral collapse.
struct ChannelCoefficients {
    Rgb beta_D{};   // direct-transmission attenuation, 1/m
    Rgb beta_B{};   // backscatter attenuation (reference model), 1/m
    Rgb G_c{};      // a + g b collapsed, 1/m
    Rgb G_B{};      // backscatter attenuation (proposed model), 1/m
    Rgb backlight{};        // b E / beta, reference veil at infinity
    Rgb backlight_scaled{}; // mu b E / G, proposed veil at infinity
    Rgb scattering{};       // collapsed b, 1/m

    double mean_scattering() const {
        return (scattering[0] + scattering[1] + scattering[2]) / 3.0;
    }
};

/// E(d, lambda) = E(0, lambda) exp(-K_d(lambda) d).
inline SpectralCurve ambient_light(const SpectralCurve& surface, const SpectralCurve& kd, double depth_m) {
    if (!(depth_m >= 0.0) || !std::isfinite(depth_m))
        throw DomainError("ambient_light: vertical depth must be finite and >= 0");
    return detail::pointwise(surface, kd, [depth_m](double e0, double k) {
        return e0 * std::exp(-k * depth_m);
    });
}

/// Response- and weight-weighted spectral mean of `curve`, one value per channel:
///   sum_c = int S_c w curve / int S_c w    (trapezoid on the shared grid)
inline Rgb channel_coefficient(const SpectralCurve& curve, const CameraResponse& response,
                               const SpectralCurve& weight) {
    detail::require_shared_grid(curve, weight, "channel_coefficient");
    Rgb out{};
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& s = response.channels[c];
        detail::require_shared_grid(curve, s, "channel_coefficient");
        const auto sv = s.values();
        const auto wv = weight.values();
        const auto cv = curve.values();
        const double norm = detail::trapezoid(curve.wavelengths(), [&](std::size_t i) { return sv[i] * wv[i]; });
        if (!(norm > 0.0))
            throw DegenerateError("channel_coefficient: zero normalization integral in channel " +
                                  std::to_string(c));
        const double num = detail::trapezoid(curve.wavelengths(),
                                             [&](std::size_t i) { return sv[i] * wv[i] * cv[i]; });
        // Weighted mean, pinned inside [min, max] against last-bit rounding.
        out[c] = std::clamp(num / norm, curve.min_value(), curve.max_value());
    }
    return out;
}

/// Camera-space radiance of `radiance`, normalized so `surface` maps to 1 per channel.
inline Rgb channel_radiance(const SpectralCurve& radiance, const CameraResponse& response,
                            const SpectralCurve& surface) {
    detail::require_shared_grid(radiance, surface, "channel_radiance");
    Rgb out{};
    for (std::size_t c = 0; c < 3; ++c) {
        const auto sv = response.channels[c].values();
        detail::require_shared_grid(radiance, response.channels[c], "channel_radiance");
        const double norm = detail::trapezoid(surface.wavelengths(),
                                              [&](std::size_t i) { return sv[i] * surface.values()[i]; });
        if (!(norm > 0.0))
            throw DegenerateError("channel_radiance: zero normalization integral in channel " +
                                  std::to_string(c));
        const double num = detail::trapezoid(radiance.wavelengths(),
                                             [&](std::size_t i) { return sv[i] * radiance.values()[i]; });
        out[c] = num / norm;
    }
    return out;
}

/// Builds every per-channel scalar the renderer needs for one water class at
/// vertical depth `depth_m`. All curves must already sit on one grid.
/// `surface` is E(0, lambda); pass std::nullopt for a flat illuminant.
inline ChannelCoefficients effective_coefficients(const WaterType& water, const CameraResponse& response,
                                                  double depth_m, double g, double mu,
                                                  const std::optional<SpectralCurve>& surface = std::nullopt) {
    if (!(g > 0.0 && g <= 1.0)) throw DomainError("effective_coefficients: g must lie in (0, 1]");
    if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("effective_coefficients: mu must lie in (0, 1]");

    const auto grid = std::vector<double>(water.absorption.wavelengths().begin(),
                                          water.absorption.wavelengths().end());
    const SpectralCurve e0 = surface ? *surface : SpectralCurve::constant(grid, 1.0);
    const SpectralCurve ambient = ambient_light(e0, water.diffuse_downwelling, depth_m);
    const SpectralCurve beta = water.attenuation();
    const SpectralCurve fwd = water.forward_attenuation(g);

    ChannelCoefficients out;
    out.beta_D = channel_coefficient(beta, response, ambient);
    out.beta_B = out.beta_D;
    out.G_c = channel_coefficient(fwd, response, ambient);
    out.G_B = out.G_c;
    out.scattering = channel_coefficient(water.scattering, response, ambient);

    const auto veil = [&](double scale, const SpectralCurve& denom) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            v[i] = scale * water.scattering.values()[i] * ambient.values()[i] / denom.values()[i];
        return SpectralCurve(grid, std::move(v));
    };
    out.backlight = channel_radiance(veil(1.0, beta), response, e0);
    out.backlight_scaled = channel_radiance(veil(mu, fwd), response, e0);
    for (std::size_t c = 0; c < 3; ++c) {
        out.backlight[c] = std::clamp(out.backlight[c], 0.0, 1.0);
        out.backlight_scaled[c] = std::clamp(out.backlight_scaled[c], 0.0, 1.0);
    }
    return out;
}

} // namespace aquasynth
