#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "aquasynth/errors.hpp"
#include "aquasynth/image.hpp"
#include "aquasynth/io.hpp"

namespace aquasynth {

/// Relative-to-metric depth mapping: min-max normalize, u^gamma, then affine
/// onto [z_min, z_max].
struct DepthScaling {
    double z_min = 1.0;
    double z_max = 5.0;
    double gamma = 1.0;
    bool invert = false; // treat larger input as nearer (disparity-style maps)

    void validate() const {
        if (!std::isfinite(z_min) || !std::isfinite(z_max) || !(z_min >= 0.0) || !(z_min < z_max))
            throw DomainError("DepthScaling: need 0 <= z_min < z_max");
        if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("DepthScaling: gamma must be > 0");
    }
};

/// Monotone in the input; output min is exactly z_min and max exactly z_max.
inline Plane scale_depth(const Plane& rel, const DepthScaling& s) {
    require_channels(rel, 1, "scale_depth");
    s.validate();
    if (rel.empty()) throw DimensionError("scale_depth: empty depth map");
    for (double v : rel.values())
        if (!std::isfinite(v)) throw DomainError("scale_depth: relative depth must be finite");
    const auto [mn_it, mx_it] = std::minmax_element(rel.values().begin(), rel.values().end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn)) throw DegenerateError("scale_depth: constant depth map cannot be range-scaled");

    const double span = mx - mn;
    const double range = s.z_max - s.z_min;
    Plane out = rel;
    for (double& v : out.values()) {
        double u = (v - mn) / span;
        if (s.invert) u = 1.0 - u;
        u = std::pow(u, s.gamma);
        // z_min + range * u is monotone under rounding; pin the top end exactly.
        v = u >= 1.0 ? s.z_max : std::min(s.z_min + range * u, s.z_max);
    }
    return out;
}

/// Relative depth from a grayscale PNG (8/16-bit, full-scale normalized) or a
/// single-channel PFM. Larger values mean farther.
inline Plane load_depth(const std::filesystem::path& path) {
    Image<double> img;
    switch (detect_format(path)) {
    case FileFormat::Png:
        img = read_png(path);
        break;
    case FileFormat::Pfm:
        img = read_pfm(path);
        break;
    default:
        throw DecodeError(path.string() + ": unsupported depth format (PNG or PFM expected)");
    }
    if (img.channels() != 1) throw DecodeError(path.string() + ": depth map must be single-channel");
    for (double v : img.values())
        if (!std::isfinite(v)) throw DecodeError(path.string() + ": non-finite depth sample");
    return img;
}

} // namespace aquasynth
