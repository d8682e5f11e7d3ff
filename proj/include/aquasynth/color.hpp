#pragma once

#include <cmath>

#include "aquasynth/image.hpp"

namespace aquasynth {

// IEC 61966-2-1 transfer function.

inline double srgb_to_linear(double v) {
    if (v <= 0.04045) return v / 12.92;
    return std::pow((v + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double v) {
    if (v <= 0.0031308) return v * 12.92;
    return 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

inline ColorImage decode_srgb(const ColorImage& encoded) {
    ColorImage out = encoded;
    for (auto& v : out.values()) v = srgb_to_linear(v);
    return out;
}

inline ColorImage encode_srgb(const ColorImage& linear) {
    ColorImage out = linear;
    for (auto& v : out.values()) v = linear_to_srgb(v);
    return out;
}

} // namespace aquasynth
