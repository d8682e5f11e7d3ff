#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>

#include <fftw3.h>

#include "aquasynth/errors.hpp"
#include "aquasynth/image.hpp"

namespace aquasynth {

/// Scale-free Gaussian random field settings.
struct FieldConfig {
    double exponent = 3.0; // power spectrum ~ |k|^-exponent
    double lo = 0.7;
    double hi = 1.3;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(exponent > 0.0) || !std::isfinite(exponent))
            throw DomainError("FieldConfig: exponent must be finite and > 0");
        if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("FieldConfig: range must be finite");
        if (!(lo > 0.0 && lo <= 1.0 && hi >= 1.0 && lo < hi))
            throw DomainError("FieldConfig: range must satisfy 0 < lo <= 1 <= hi, lo < hi");
    }
};

/// splitmix64 finalizer; mixes a base seed with an index into an independent seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace detail {

// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};

/// Signed integer frequency of FFT bin i out of n, in cycles per sample.
inline double fft_frequency(std::size_t i, std::size_t n) {
    const auto si = static_cast<double>(i);
    const auto sn = static_cast<double>(n);
    return (i <= n / 2 ? si : si - sn) / sn;
}

} // namespace detail

/// Spectral synthesis: complex white noise shaped by |k|^(-exponent/2) with the
/// zero frequency removed, inverse FFT, real part, then min-max rescale so the
/// output spans exactly [lo, hi].
inline Plane generate_grf(std::size_t height, std::size_t width, const FieldConfig& cfg) {
    if (height < 2 || width < 2) throw DimensionError("generate_grf: both dimensions must be >= 2");
    cfg.validate();

    const std::size_t n = height * width;
    std::unique_ptr<fftw_complex[], detail::FftwFree> buf(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
    if (!buf) throw std::bad_alloc();

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double half_exp = -0.5 * cfg.exponent;
    for (std::size_t y = 0; y < height; ++y) {
        const double fy = detail::fft_frequency(y, height);
        for (std::size_t x = 0; x < width; ++x) {
            const double fx = detail::fft_frequency(x, width);
            const double k = std::hypot(fx, fy);
            const double amp = k > 0.0 ? std::pow(k, half_exp) : 0.0;
            const double re = normal(rng);
            const double im = normal(rng);
            buf[y * width + x][0] = amp * re;
            buf[y * width + x][1] = amp * im;
        }
    }

    fftw_plan plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan = fftw_plan_dft_2d(static_cast<int>(height), static_cast<int>(width), buf.get(), buf.get(),
                                FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }

    Plane field = make_plane(height, width);
    for (std::size_t i = 0; i < n; ++i) field[i] = buf[i][0];

    const auto [mn_it, mx_it] = std::minmax_element(field.values().begin(), field.values().end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn)) throw DegenerateError("generate_grf: field has zero range");
    const double span = mx - mn;
    for (double& v : field.values()) {
        const double u = (v - mn) / span;
        v = cfg.lo * (1.0 - u) + cfg.hi * u; // exact lo at u = 0, exact hi at u = 1
    }
    return field;
}

/// Pointwise depth * field.
inline Plane modulate_depth(const Plane& depth, const Plane& field) {
    require_channels(depth, 1, "modulate_depth depth");
    require_channels(field, 1, "modulate_depth field");
    require_same_geometry(depth, field, "modulate_depth");
    Plane out = depth;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= field[i];
    return out;
}

} // namespace aquasynth
