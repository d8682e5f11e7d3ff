#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "aquasynth/errors.hpp"
#include "aquasynth/image.hpp"
#include "aquasynth/optics.hpp"

namespace aquasynth {

enum class FileFormat { Png, Jpeg, Pfm, Unknown };

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        if (mode[0] == 'r') throw DecodeError("cannot open " + path.string());
        throw IoError("cannot open " + path.string() + " for writing");
    }
    return f;
}

[[noreturn]] inline void png_throw(png_structp, png_const_charp msg) {
    throw DecodeError(std::string("png: ") + msg);
}
inline void png_silent(png_structp, png_const_charp) {}

[[noreturn]] inline void png_throw_write(png_structp, png_const_charp msg) {
    throw IoError(std::string("png: ") + msg);
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_silent);
        if (!png) throw DecodeError("png: out of memory");
        info = png_create_info_struct(png);
        if (!info) {
            png_destroy_read_struct(&png, nullptr, nullptr);
            throw DecodeError("png: out of memory");
        }
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw_write, png_silent);
        if (!png) throw IoError("png: out of memory");
        info = png_create_info_struct(png);
        if (!info) {
            png_destroy_write_struct(&png, nullptr);
            throw IoError("png: out of memory");
        }
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
    PngWriter(const PngWriter&) = delete;
    PngWriter& operator=(const PngWriter&) = delete;
};

struct JpegErrorManager {
    jpeg_error_mgr base;
};

[[noreturn]] inline void jpeg_throw(j_common_ptr cinfo) {
    char buffer[JMSG_LENGTH_MAX];
    (*cinfo->err->format_message)(cinfo, buffer);
    throw DecodeError(std::string("jpeg: ") + buffer);
}

inline void jpeg_silent(j_common_ptr, int) {}

} // namespace detail

/// Sniffs the leading magic bytes.
inline FileFormat detect_format(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DecodeError("cannot open " + path.string());
    std::array<unsigned char, 8> magic{};
    in.read(reinterpret_cast<char*>(magic.data()), magic.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    static constexpr std::array<unsigned char, 8> png_sig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (got >= 8 && magic == png_sig) return FileFormat::Png;
    if (got >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) return FileFormat::Jpeg;
    if (got >= 2 && magic[0] == 'P' && (magic[1] == 'f' || magic[1] == 'F')) return FileFormat::Pfm;
    return FileFormat::Unknown;
}

/// Decodes a PNG to [0,1]; palette expanded, alpha dropped. Channel count is 1 or 3.
inline Image<double> read_png(const std::filesystem::path& path) {
    auto file = detail::open_file(path, "rb");
    detail::PngReader r;
    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);

    const int color = png_get_color_type(r.png, r.info);
    const int depth = png_get_bit_depth(r.png, r.info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png), png_set_strip_alpha(r.png);
    if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(r.png);
    png_set_interlace_handling(r.png);
    png_read_update_info(r.png, r.info);

    const std::size_t w = png_get_image_width(r.png, r.info);
    const std::size_t h = png_get_image_height(r.png, r.info);
    const std::size_t ch = png_get_channels(r.png, r.info);
    const int out_depth = png_get_bit_depth(r.png, r.info);
    if (ch != 1 && ch != 3) throw DecodeError(path.string() + ": unsupported PNG channel layout");

    const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);
    std::vector<unsigned char> raw(rowbytes * h);
    std::vector<png_bytep> rows(h);
    for (std::size_t y = 0; y < h; ++y) rows[y] = raw.data() + y * rowbytes;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    Image<double> img(h, w, ch);
    if (out_depth == 16) {
        for (std::size_t y = 0; y < h; ++y) {
            const unsigned char* row = rows[y];
            for (std::size_t i = 0; i < w * ch; ++i) {
                std::uint16_t v;
                std::memcpy(&v, row + 2 * i, 2);
                img[y * w * ch + i] = static_cast<double>(v) / 65535.0;
            }
        }
    } else {
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t i = 0; i < w * ch; ++i) img[y * w * ch + i] = static_cast<double>(rows[y][i]) / 255.0;
    }
    return img;
}

/// Decodes a baseline or progressive JPEG to RGB in [0,1].
inline ColorImage read_jpeg(const std::filesystem::path& path) {
    auto file = detail::open_file(path, "rb");
    jpeg_decompress_struct cinfo{};
    detail::JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = detail::jpeg_throw;
    err.base.emit_message = detail::jpeg_silent;

    struct Guard {
        jpeg_decompress_struct* c;
        ~Guard() { jpeg_destroy_decompress(c); }
    };
    jpeg_create_decompress(&cinfo);
    Guard guard{&cinfo};
    jpeg_stdio_src(&cinfo, file.get());
    jpeg_read_header(&cinfo, TRUE);
    if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK)
        throw DecodeError(path.string() + ": CMYK JPEG not supported");
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    if (cinfo.output_components != 3) throw DecodeError(path.string() + ": unexpected JPEG component count");

    const std::size_t w = cinfo.output_width, h = cinfo.output_height;
    ColorImage img = make_color(h, w);
    std::vector<JSAMPLE> row(w * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        const std::size_t y = cinfo.output_scanline;
        JSAMPROW ptr = row.data();
        jpeg_read_scanlines(&cinfo, &ptr, 1);
        for (std::size_t i = 0; i < w * 3; ++i) img[y * w * 3 + i] = static_cast<double>(row[i]) / 255.0;
    }
    jpeg_finish_decompress(&cinfo);
    return img;
}

/// Loads a PNG or JPEG as gamma-encoded RGB in [0,1]; grayscale is promoted.
inline ColorImage load_image(const std::filesystem::path& path) {
    switch (detect_format(path)) {
    case FileFormat::Png: {
        auto img = read_png(path);
        if (img.channels() == 3) return img;
        ColorImage rgb = make_color(img.height(), img.width());
        for (std::size_t p = 0; p < img.pixels(); ++p)
            for (std::size_t c = 0; c < 3; ++c) rgb[p * 3 + c] = img[p];
        return rgb;
    }
    case FileFormat::Jpeg:
        return read_jpeg(path);
    default:
        throw DecodeError(path.string() + ": unsupported image format (PNG or JPEG expected)");
    }
}

/// Round-half-up quantization of v in [0,1] to [0, max_code].
inline std::uint32_t quantize(double v, std::uint32_t max_code) {
    return static_cast<std::uint32_t>(std::floor(v * static_cast<double>(max_code) + 0.5));
}

/// Writes a 1- or 3-channel image as 8- or 16-bit PNG. Values must lie in [0,1].
inline void save_image(const std::filesystem::path& path, const Image<double>& img, int bit_depth = 8) {
    if (bit_depth != 8 && bit_depth != 16) throw DomainError("save_image: bit depth must be 8 or 16");
    if (img.channels() != 1 && img.channels() != 3)
        throw DimensionError("save_image: 1 or 3 channels required");
    if (img.empty()) throw DimensionError("save_image: empty image");
    for (double v : img.values())
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("save_image: value outside [0, 1]");

    const std::size_t w = img.width(), h = img.height(), ch = img.channels();
    const std::size_t bytes = bit_depth / 8;
    std::vector<unsigned char> raw(w * h * ch * bytes);
    const std::uint32_t max_code = bit_depth == 8 ? 255u : 65535u;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const auto q = quantize(img[i], max_code);
        if (bit_depth == 8) {
            raw[i] = static_cast<unsigned char>(q);
        } else {
            raw[2 * i] = static_cast<unsigned char>(q >> 8);
            raw[2 * i + 1] = static_cast<unsigned char>(q & 0xFF);
        }
    }

    auto file = detail::open_file(path, "wb");
    detail::PngWriter wr;
    png_init_io(wr.png, file.get());
    png_set_IHDR(wr.png, wr.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth,
                 ch == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(wr.png, wr.info);
    const std::size_t rowbytes = w * ch * bytes;
    for (std::size_t y = 0; y < h; ++y) png_write_row(wr.png, raw.data() + y * rowbytes);
    png_write_end(wr.png, nullptr);
    if (std::fflush(file.get()) != 0) throw IoError("write failed: " + path.string());
}

/// Reads a PFM. Rows are stored bottom-up; the sign of the scale selects endianness.
inline Image<double> read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DecodeError("cannot open " + path.string());
    std::string magic;
    long long w = 0, h = 0;
    double scale = 0.0;
    if (!(in >> magic >> w >> h >> scale)) throw DecodeError(path.string() + ": malformed PFM header");
    if (magic != "Pf" && magic != "PF") throw DecodeError(path.string() + ": not a PFM file");
    if (w <= 0 || h <= 0 || scale == 0.0 || !std::isfinite(scale))
        throw DecodeError(path.string() + ": invalid PFM dimensions or scale");
    in.get(); // single whitespace byte ends the header
    const std::size_t ch = magic == "PF" ? 3 : 1;
    const auto uw = static_cast<std::size_t>(w), uh = static_cast<std::size_t>(h);
    std::vector<unsigned char> raw(uw * uh * ch * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw DecodeError(path.string() + ": truncated PFM data");

    const bool file_little = scale < 0.0;
    const bool swap = file_little != (std::endian::native == std::endian::little);
    Image<double> img(uh, uw, ch);
    for (std::size_t row = 0; row < uh; ++row) {
        const std::size_t y = uh - 1 - row;
        for (std::size_t i = 0; i < uw * ch; ++i) {
            unsigned char* p = raw.data() + (row * uw * ch + i) * 4;
            if (swap) std::reverse(p, p + 4);
            float f;
            std::memcpy(&f, p, 4);
            img[y * uw * ch + i] = static_cast<double>(f);
        }
    }
    return img;
}

/// Writes a 1- or 3-channel PFM with float32 samples.
inline void write_pfm(const std::filesystem::path& path, const Image<double>& img, bool little_endian = true) {
    if (img.channels() != 1 && img.channels() != 3) throw DimensionError("write_pfm: 1 or 3 channels required");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << (img.channels() == 3 ? "PF" : "Pf") << '\n'
        << img.width() << ' ' << img.height() << '\n'
        << (little_endian ? "-1.0" : "1.0") << '\n';
    const bool swap = little_endian != (std::endian::native == std::endian::little);
    const std::size_t rowlen = img.width() * img.channels();
    std::vector<unsigned char> row(rowlen * 4);
    for (std::size_t r = 0; r < img.height(); ++r) {
        const std::size_t y = img.height() - 1 - r;
        for (std::size_t i = 0; i < rowlen; ++i) {
            const auto f = static_cast<float>(img[y * rowlen + i]);
            unsigned char* p = row.data() + i * 4;
            std::memcpy(p, &f, 4);
            if (swap) std::reverse(p, p + 4);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

/// Result of a min-max contrast stretch.
struct Stretch {
    double min = 0.0;
    double max = 0.0;
    /// 1 / (max - min), or 0 for a flat panel.
    double factor() const { return max > min ? 1.0 / (max - min) : 0.0; }
};

/// Maps the panel's min to 0 and max to 1 (all channels share one range).
/// A flat panel maps to 0.
inline std::pair<ColorImage, Stretch> stretch_panel(const ColorImage& panel) {
    Stretch s;
    if (!panel.empty()) {
        const auto [mn, mx] = std::minmax_element(panel.values().begin(), panel.values().end());
        s.min = *mn;
        s.max = *mx;
    }
    ColorImage out = panel;
    const double f = s.factor();
    for (double& v : out.values()) v = f > 0.0 ? std::clamp((v - s.min) * f, 0.0, 1.0) : 0.0;
    return {std::move(out), s};
}

inline constexpr std::size_t kTermGridGutter = 4;

/// Lays D | F | B side by side with a black gutter, each panel contrast-stretched.
inline ColorImage term_grid(const TermStack& stack, std::array<Stretch, 3>* stretches = nullptr) {
    const std::size_t h = stack.direct.height(), w = stack.direct.width(), g = kTermGridGutter;
    ColorImage grid = make_color(h, 3 * w + 2 * g, 0.0);
    const ColorImage* panels[3] = {&stack.direct, &stack.forward, &stack.backscatter};
    for (std::size_t k = 0; k < 3; ++k) {
        auto [img, s] = stretch_panel(*panels[k]);
        if (stretches) (*stretches)[k] = s;
        const std::size_t x0 = k * (w + g);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                for (std::size_t c = 0; c < 3; ++c) grid(y, x0 + x, c) = img(y, x, c);
    }
    return grid;
}

/// Writes the term grid next to `path`. The stretch factor of each panel is
/// embedded in the file name; the path actually written is returned.
inline std::filesystem::path emit_term_grid(const TermStack& stack, const std::filesystem::path& path) {
    std::array<Stretch, 3> s;
    const ColorImage grid = term_grid(stack, &s);
    char suffix[128];
    std::snprintf(suffix, sizeof suffix, "_D%.4g_F%.4g_B%.4g", s[0].factor(), s[1].factor(), s[2].factor());
    auto out = path;
    out.replace_filename(path.stem().string() + suffix + (path.has_extension() ? path.extension().string() : ".png"));
    save_image(out, grid, 8);
    return out;
}

} // namespace aquasynth
