#pragma once

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "aquasynth/errors.hpp"
#include "aquasynth/image.hpp"

namespace aquasynth {

/// Linear-light clean image J(x) and metric camera-to-scene distance z(x).
struct ScenePair {
    ColorImage radiance;
    Plane depth;

    void validate() const {
        require_channels(radiance, 3, "ScenePair radiance");
        require_channels(depth, 1, "ScenePair depth");
        require_same_geometry(radiance, depth, "ScenePair");
        for (double z : depth.values())
            if (!std::isfinite(z) || z < 0.0) throw DomainError("ScenePair: depth must be finite and >= 0");
        for (double v : radiance.values())
            if (!(v >= 0.0 && v <= 1.0)) throw DomainError("ScenePair: radiance must lie in [0, 1]");
    }
};

/// The three additive image-formation terms.
struct TermStack {
    ColorImage direct;
    ColorImage forward;
    ColorImage backscatter;

    ColorImage sum() const {
        ColorImage out = direct;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += forward[i] + backscatter[i];
        return out;
    }
};

namespace detail {

inline void require_non_negative(const Rgb& v, const char* what) {
    for (double x : v)
        if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be finite and >= 0");
}

} // namespace detail

/// t(x) = exp(-beta_c z(x)), one plane per channel.
inline ColorImage transmission_map(const Plane& depth, const Rgb& beta) {
    require_channels(depth, 1, "transmission_map depth");
    detail::require_non_negative(beta, "transmission_map: beta");
    ColorImage t = make_color(depth.height(), depth.width());
    for (std::size_t p = 0; p < depth.pixels(); ++p)
        for (std::size_t c = 0; c < 3; ++c) t[p * 3 + c] = std::exp(-beta[c] * depth[p]);
    return t;
}

/// D(x) = J(x) t(x).
inline ColorImage direct_transmission(const ScenePair& scene, const Rgb& beta_D) {
    require_channels(scene.radiance, 3, "direct_transmission radiance");
    require_same_geometry(scene.radiance, scene.depth, "direct_transmission");
    ColorImage d = transmission_map(scene.depth, beta_D);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= scene.radiance[i];
    return d;
}

/// B(x) = B_inf (1 - exp(-atten_c z(x))).
inline ColorImage backscatter(const Plane& depth, const Rgb& backlight, const Rgb& atten) {
    require_channels(depth, 1, "backscatter depth");
    for (double a : atten)
        if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("backscatter: attenuation must be > 0");
    for (double b : backlight)
        if (!(b >= 0.0 && b <= 1.0)) throw DomainError("backscatter: backlight must lie in [0, 1]");
    ColorImage out = make_color(depth.height(), depth.width());
    for (std::size_t p = 0; p < depth.pixels(); ++p)
        for (std::size_t c = 0; c < 3; ++c)
            out[p * 3 + c] = backlight[c] * -std::expm1(-atten[c] * depth[p]);
    return out;
}

/// w(x) = exp(-G_c z(x)) - exp(-beta_c z(x)); non-negative whenever G_c <= beta_c.
inline ColorImage forward_weight(const Plane& depth, const Rgb& G_c, const Rgb& beta_D) {
    require_channels(depth, 1, "forward_weight depth");
    detail::require_non_negative(G_c, "forward_weight: G_c");
    detail::require_non_negative(beta_D, "forward_weight: beta_D");
    for (std::size_t c = 0; c < 3; ++c)
        if (G_c[c] > beta_D[c])
            throw ParametrizationError("forward_weight: G_c exceeds beta_D in channel " + std::to_string(c));
    ColorImage w = make_color(depth.height(), depth.width());
    for (std::size_t p = 0; p < depth.pixels(); ++p)
        for (std::size_t c = 0; c < 3; ++c)
            w[p * 3 + c] = std::exp(-G_c[c] * depth[p]) - std::exp(-beta_D[c] * depth[p]);
    return w;
}

/// Radius of the truncated Gaussian: ceil(3 sigma), zero for sigma == 0.
inline std::size_t kernel_radius(double sigma) {
    return static_cast<std::size_t>(std::ceil(3.0 * sigma));
}

/// Normalized 1-D Gaussian taps truncated at `radius`. sigma == 0 yields a
/// centered unit impulse of the same length.
inline std::vector<double> gaussian_kernel(double sigma, std::size_t radius) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("gaussian_kernel: sigma must be >= 0");
    std::vector<double> k(2 * radius + 1, 0.0);
    if (sigma == 0.0) {
        k[radius] = 1.0;
        return k;
    }
    const double inv = -0.5 / (sigma * sigma);
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(radius);
        k[i] = std::exp(inv * d * d);
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Normalized 1-D Gaussian taps, radius ceil(3 sigma), at least one tap.
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("gaussian_kernel: sigma must be >= 0");
    return gaussian_kernel(sigma, kernel_radius(sigma));
}

namespace detail {

/// Separable convolution with replicated edges, evaluated only on the output
/// window [y0, y1) x [x0, x1). Returns a window-sized image.
inline Image<double> convolve_window(const Image<double>& img, const std::vector<double>& k, std::size_t y0,
                                     std::size_t y1, std::size_t x0, std::size_t x1) {
    const auto r = static_cast<std::ptrdiff_t>(k.size() / 2);
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    const auto w = static_cast<std::ptrdiff_t>(img.width());
    const std::size_t ch = img.channels();
    const std::size_t ow = x1 - x0;

    // Horizontal pass over every row the vertical pass will touch.
    const auto ty0 = std::max<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(y0) - r, 0);
    const auto ty1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(y1) + r, h);
    Image<double> tmp(static_cast<std::size_t>(ty1 - ty0), ow, ch);
    for (std::ptrdiff_t y = ty0; y < ty1; ++y)
        for (std::size_t x = x0; x < x1; ++x)
            for (std::size_t c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (std::ptrdiff_t i = -r; i <= r; ++i) {
                    const auto xx = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(x) + i, 0, w - 1);
                    acc += k[static_cast<std::size_t>(i + r)] * img(static_cast<std::size_t>(y), static_cast<std::size_t>(xx), c);
                }
                tmp(static_cast<std::size_t>(y - ty0), x - x0, c) = acc;
            }

    Image<double> out(y1 - y0, ow, ch);
    for (std::size_t y = y0; y < y1; ++y)
        for (std::size_t x = 0; x < ow; ++x)
            for (std::size_t c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (std::ptrdiff_t i = -r; i <= r; ++i) {
                    const auto yy = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(y) + i, 0, h - 1);
                    acc += k[static_cast<std::size_t>(i + r)] * tmp(static_cast<std::size_t>(yy - ty0), x, c);
                }
                out(y - y0, x, c) = acc;
            }
    return out;
}

/// Half the L1 distance between the 2-D kernel at sigma_f and the linear blend
/// of the 2-D kernels at a and b. For inputs spanning [m, M] this bounds the
/// blend error by (M - m) times the returned value.
inline double blend_error(double a, double b, double f, std::size_t radius) {
    const auto ka = gaussian_kernel(a, radius);
    const auto kb = gaussian_kernel(b, radius);
    const auto kf = gaussian_kernel(a + f * (b - a), radius);
    double err = 0.0;
    for (std::size_t i = 0; i < ka.size(); ++i)
        for (std::size_t j = 0; j < ka.size(); ++j)
            err += std::abs((1.0 - f) * ka[i] * ka[j] + f * kb[i] * kb[j] - kf[i] * kf[j]);
    return 0.5 * err;
}

inline void refine_levels(double a, double b, std::size_t radius, double tol, std::vector<double>& nodes, int depth = 0) {
    double worst = 0.0;
    for (double f : {0.25, 0.5, 0.75}) worst = std::max(worst, blend_error(a, b, f, radius));
    if (worst > tol && depth < 24) {
        const double mid = 0.5 * (a + b);
        refine_levels(a, mid, radius, tol, nodes, depth + 1);
        refine_levels(mid, b, radius, tol, nodes, depth + 1);
    } else {
        nodes.push_back(b);
    }
}

} // namespace detail

/// Separable Gaussian blur with replicated edges.
inline Image<double> gaussian_blur(const Image<double>& img, double sigma) {
    const auto k = gaussian_kernel(sigma);
    if (k.size() == 1) return img;
    return detail::convolve_window(img, k, 0, img.height(), 0, img.width());
}

/// One blur level: a sigma and the truncation radius its pixels use.
struct BlurLevel {
    double sigma = 0.0;
    std::size_t radius = 0;
};

/// sigma levels covering [lo, hi] for the binned blur.
///
/// ceil(3 sigma) makes the exact result jump wherever 3 sigma crosses an
/// integer, so the range is cut at those points and each piece carries its own
/// radius; a blend never spans a jump. Inside a piece, levels are bisected
/// until blending neighbours is within `tol` of the exact kernel (half L1 of
/// the 2-D kernel difference).
struct BlurLevels {
    struct Piece {
        std::size_t radius;
        std::vector<double> nodes; // ascending sigma
        std::size_t first_level;   // index of nodes[0] in `levels`
    };
    std::vector<Piece> pieces;
    std::vector<BlurLevel> levels;

    BlurLevels(double lo, double hi, double tol) {
        const std::size_t r_lo = std::max<std::size_t>(1, kernel_radius(lo));
        const std::size_t r_hi = std::max<std::size_t>(1, kernel_radius(hi));
        for (std::size_t r = r_lo; r <= r_hi; ++r) {
            const double a = std::max(lo, static_cast<double>(r - 1) / 3.0);
            const double b = std::min(hi, static_cast<double>(r) / 3.0);
            Piece p{r, {a}, levels.size()};
            if (b > a) detail::refine_levels(a, b, r, tol, p.nodes);
            for (double s : p.nodes) levels.push_back({s, r});
            pieces.push_back(std::move(p));
        }
    }

    /// Piece holding sigma, by its radius.
    const Piece& piece_for(double sigma) const {
        const std::size_t r = std::max<std::size_t>(1, kernel_radius(sigma));
        return pieces[std::min(r - pieces.front().radius, pieces.size() - 1)];
    }
};

/// Default blend tolerance of variable_blur, in units of the input range.
inline constexpr double kBlurTolerance = 2.5e-4;

/// Depth-dependent Gaussian blur with sigma(x) = phi z(x) px_per_unit pixels.
///
/// Binned evaluation: sigma is quantized into levels (see BlurLevels), each
/// referenced level is blurred once over the bounding box of the pixels that
/// use it, and every pixel linearly blends its two bracketing levels. A
/// constant sigma map reduces to a single exact blur.
inline Image<double> variable_blur(const Image<double>& img, const Plane& depth, double phi,
                                   double px_per_unit = 1.0, double tol = kBlurTolerance) {
    if (!(phi >= 0.0) || !std::isfinite(phi)) throw DomainError("variable_blur: phi must be >= 0");
    if (!(px_per_unit > 0.0) || !std::isfinite(px_per_unit))
        throw DomainError("variable_blur: pixel scale must be > 0");
    if (!(tol > 0.0)) throw DomainError("variable_blur: tolerance must be > 0");
    require_channels(depth, 1, "variable_blur depth");
    require_same_geometry(img, depth, "variable_blur");
    if (phi == 0.0 || img.empty()) return img;

    const std::size_t n = depth.pixels();
    std::vector<double> sigma(n);
    for (std::size_t p = 0; p < n; ++p) {
        sigma[p] = phi * depth[p] * px_per_unit;
        if (!(sigma[p] >= 0.0) || !std::isfinite(sigma[p]))
            throw DomainError("variable_blur: depth must be finite and >= 0");
    }
    const auto [lo_it, hi_it] = std::minmax_element(sigma.begin(), sigma.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) return gaussian_blur(img, lo);

    const BlurLevels table(lo, hi, tol);
    const std::size_t nl = table.levels.size();

    // Per pixel: lower level index and blend fraction towards the next one.
    std::vector<std::size_t> base(n);
    std::vector<double> frac(n);
    struct Box {
        std::size_t y0 = SIZE_MAX, y1 = 0, x0 = SIZE_MAX, x1 = 0;
        bool used() const { return y1 > 0; }
        void add(std::size_t y, std::size_t x) {
            y0 = std::min(y0, y), y1 = std::max(y1, y + 1), x0 = std::min(x0, x), x1 = std::max(x1, x + 1);
        }
    };
    std::vector<Box> boxes(nl);
    const std::size_t w = depth.width();
    for (std::size_t p = 0; p < n; ++p) {
        const auto& piece = table.piece_for(sigma[p]);
        const auto& nodes = piece.nodes;
        std::size_t j = 0;
        if (nodes.size() > 1) {
            auto it = std::upper_bound(nodes.begin(), nodes.end(), sigma[p]);
            j = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - nodes.begin() - 1, 0,
                                                                    static_cast<std::ptrdiff_t>(nodes.size()) - 2));
            frac[p] = std::clamp((sigma[p] - nodes[j]) / (nodes[j + 1] - nodes[j]), 0.0, 1.0);
        } else {
            frac[p] = 0.0;
        }
        base[p] = piece.first_level + j;
        boxes[base[p]].add(p / w, p % w);
        if (frac[p] > 0.0) boxes[base[p] + 1].add(p / w, p % w);
    }

    const std::size_t ch = img.channels();
    Image<double> out(img.height(), img.width(), ch, 0.0);
    for (std::size_t k = 0; k < nl; ++k) {
        const Box& b = boxes[k];
        if (!b.used()) continue;
        const auto kern = gaussian_kernel(table.levels[k].sigma, table.levels[k].radius);
        const Image<double> blurred = detail::convolve_window(img, kern, b.y0, b.y1, b.x0, b.x1);
        const std::size_t bw = b.x1 - b.x0;
        for (std::size_t y = b.y0; y < b.y1; ++y)
            for (std::size_t x = b.x0; x < b.x1; ++x) {
                const std::size_t p = y * w + x;
                double wgt = 0.0;
                if (base[p] == k) wgt = 1.0 - frac[p];
                else if (base[p] + 1 == k) wgt = frac[p];
                if (wgt == 0.0) continue;
                const std::size_t q = ((y - b.y0) * bw + (x - b.x0)) * ch;
                for (std::size_t c = 0; c < ch; ++c) out[p * ch + c] += wgt * blurred[q + c];
            }
    }
    return out;
}

/// F(x) = blur(w(x) J(x)) with sigma = phi z(x). The latent image J is weighted,
/// not the attenuated direct term.
inline ColorImage forward_scatter(const ScenePair& scene, const Rgb& G_c, const Rgb& beta_D, double phi,
                                  double px_per_unit = 1.0) {
    require_same_geometry(scene.radiance, scene.depth, "forward_scatter");
    ColorImage weighted = forward_weight(scene.depth, G_c, beta_D);
    for (std::size_t i = 0; i < weighted.size(); ++i) weighted[i] *= scene.radiance[i];
    return variable_blur(weighted, scene.depth, phi, px_per_unit);
}

} // namespace aquasynth
