#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "aquasynth/color.hpp"
#include "aquasynth/config.hpp"
#include "aquasynth/depth.hpp"
#include "aquasynth/io.hpp"
#include "aquasynth/pipeline.hpp"
#include "aquasynth/spectral_io.hpp"

namespace aquasynth {

namespace fs = std::filesystem;

struct RunOptions {
    fs::path config_path;
    unsigned jobs = 1;
    bool dry_run = false;
    bool emit_terms = false;
    std::ostream* progress = nullptr;
};

struct RunResult {
    json manifest;
    int exit_code = 0;
    std::vector<fs::path> outputs; // planned (dry run) or written, relative to output dir
};

/// One clean input image and its depth map.
struct SourceImage {
    std::string stem;
    fs::path image;
    fs::path depth;
};

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline bool is_depth_name(const std::string& name) {
    const auto l = lower(name);
    return ends_with(l, ".depth.png") || ends_with(l, "_depth.png") || ends_with(l, ".pfm");
}

inline std::optional<fs::path> find_depth(const fs::path& dir, const std::string& stem) {
    for (const char* suffix : {".pfm", ".depth.png", "_depth.png"}) {
        const auto p = dir / (stem + suffix);
        if (fs::is_regular_file(p)) return p;
    }
    return std::nullopt;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& th : pool) th.join();
}

inline json rel_string(const fs::path& p) { return p.generic_string(); }

inline void write_manifest(const fs::path& path, const json& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

inline json manifest_header(const BatchConfig& cfg, const SpectralLibrary& lib, const char* kind) {
    return {{"software", {{"name", "aquasynth"}, {"version", std::string(kVersion)}}},
            {"kind", kind},
            {"config_hash", cfg.hash},
            {"config", cfg.source},
            {"seed", cfg.seed},
            {"data_dir", lib.root().generic_string()}};
}

/// Loads one source and renders it under `params`.
inline Rendering render_source(const SourceImage& src, const DegradationConfig& params, const SpectralLibrary& lib) {
    const ColorImage encoded = load_image(src.image);
    const Plane rel = load_depth(src.depth);
    require_same_geometry(encoded, rel, ("depth map for " + src.stem).c_str());
    const ScenePair scene{decode_srgb(encoded), scale_depth(rel, params.scaling)};
    return term_report(scene, params, &lib);
}

} // namespace detail

/// Lists input images (PNG/JPEG, sorted by file name) and pairs each with its
/// depth map: <stem>.pfm, <stem>.depth.png or <stem>_depth.png.
inline std::vector<SourceImage> discover_sources(const BatchConfig& cfg) {
    if (!fs::is_directory(cfg.input_dir)) throw ConfigError("input.dir", "not a directory: " + cfg.input_dir.string());
    if (!fs::is_directory(cfg.depth_dir)) throw ConfigError("input.depth_dir", "not a directory: " + cfg.depth_dir.string());
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(cfg.input_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        const auto ext = detail::lower(entry.path().extension().string());
        if (detail::is_depth_name(name)) continue;
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") images.push_back(entry.path());
    }
    std::sort(images.begin(), images.end());
    if (images.empty()) throw ConfigError("input.dir", "no PNG or JPEG images in " + cfg.input_dir.string());

    std::vector<SourceImage> out;
    std::string missing;
    for (const auto& img : images) {
        const auto stem = img.stem().string();
        if (auto depth = detail::find_depth(cfg.depth_dir, stem)) {
            out.push_back({stem, img, *depth});
        } else {
            missing += (missing.empty() ? "" : ", ") + stem;
        }
    }
    if (!missing.empty()) throw ConfigError("input", "missing depth map for: " + missing);
    return out;
}

/// Renders every (image, water type, mode) cell to
/// <output>/<water>/<mode>/<stem>.png and writes <output>/manifest.json.
inline RunResult run_batch(const RunOptions& opt) {
    const BatchConfig cfg = load_batch_config(opt.config_path);
    const SpectralLibrary lib;
    const auto sources = discover_sources(cfg);

    struct Job {
        std::size_t image;
        std::string water;
        Mode mode;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < sources.size(); ++i)
        for (const auto& w : cfg.water_types)
            for (Mode m : cfg.modes) jobs.push_back({i, w, m});

    RunResult result;
    for (const auto& j : jobs)
        result.outputs.push_back(fs::path(j.water) / std::string(to_string(j.mode)) / (sources[j.image].stem + ".png"));

    result.manifest = detail::manifest_header(cfg, lib, "batch");
    if (opt.dry_run) {
        result.manifest["dry_run"] = true;
        for (std::size_t k = 0; k < jobs.size(); ++k)
            result.manifest["jobs"].push_back({{"image", sources[jobs[k].image].stem},
                                               {"water", jobs[k].water},
                                               {"mode", std::string(to_string(jobs[k].mode))},
                                               {"output", detail::rel_string(result.outputs[k])}});
        return result;
    }

    std::vector<json> entries(jobs.size());
    std::mutex progress_mutex;
    std::size_t done = 0;
    detail::parallel_for(jobs.size(), opt.jobs, [&](std::size_t k) {
        const auto& job = jobs[k];
        const auto& src = sources[job.image];
        DegradationConfig params = cfg.params;
        params.water = job.water;
        params.mode = job.mode;
        params.seed = derive_seed(cfg.seed, job.image);

        json e = {{"image", src.stem},
                  {"source", fs::relative(src.image, cfg.input_dir).generic_string()},
                  {"depth", fs::relative(src.depth, cfg.depth_dir).generic_string()},
                  {"water", job.water},
                  {"mode", std::string(to_string(job.mode))},
                  {"field_seed", params.seed},
                  {"params", params_json(params)},
                  {"output", detail::rel_string(result.outputs[k])}};
        try {
            const Rendering r = detail::render_source(src, params, lib);
            const auto out_path = cfg.output_dir / result.outputs[k];
            fs::create_directories(out_path.parent_path());
            save_image(out_path, encode_srgb(r.image), cfg.bit_depth);
            e["coefficients"] = coefficients_json(r.coefficients);
            e["terms"] = {{"direct", {{"mean", r.direct.mean}, {"max", r.direct.max}}},
                          {"forward", {{"mean", r.forward.mean}, {"max", r.forward.max}}},
                          {"backscatter", {{"mean", r.backscatter.mean}, {"max", r.backscatter.max}}}};
            if (opt.emit_terms) {
                auto grid_path = out_path;
                grid_path.replace_filename(src.stem + "_terms.png");
                e["term_grid"] = fs::relative(emit_term_grid(r.terms, grid_path), cfg.output_dir).generic_string();
            }
            e["status"] = "ok";
        } catch (const std::exception& ex) {
            e["status"] = "error";
            e["error"] = ex.what();
        }
        entries[k] = std::move(e);
        if (opt.progress) {
            std::lock_guard lock(progress_mutex);
            ++done;
            *opt.progress << "[" << done << "/" << jobs.size() << "] " << job.water << "/" << to_string(job.mode)
                          << "/" << src.stem << " " << entries[k]["status"].get<std::string>() << '\n';
        }
    });

    std::size_t failed = 0;
    result.manifest["jobs"] = json::array();
    for (auto& e : entries) {
        if (e["status"] != "ok") ++failed;
        result.manifest["jobs"].push_back(std::move(e));
    }
    result.manifest["summary"] = {{"total", jobs.size()}, {"ok", jobs.size() - failed}, {"failed", failed}};
    fs::create_directories(cfg.output_dir);
    detail::write_manifest(cfg.output_dir / "manifest.json", result.manifest);
    result.exit_code = failed == 0 ? 0 : 2;
    return result;
}

/// Seeded left/right answer key: floor(n/2) pairs show the proposed image on
/// the left, the rest on the right, in shuffled order.
inline std::vector<bool> pair_answer_key(std::size_t n, std::uint64_t seed) {
    std::vector<bool> proposed_left(n, false);
    for (std::size_t i = 0; i < n / 2; ++i) proposed_left[i] = true;
    std::mt19937_64 rng(derive_seed(seed, 0x5041495253ULL));
    std::shuffle(proposed_left.begin(), proposed_left.end(), rng);
    return proposed_left;
}

/// Image-to-water assignment for pair mode. Cross: every image with every
/// water type. Split: images are shuffled and dealt into one group per water
/// type, so each image appears once.
inline std::vector<std::pair<std::size_t, std::string>> pair_cells(const BatchConfig& cfg, std::size_t images) {
    std::vector<std::pair<std::size_t, std::string>> cells;
    if (cfg.pair_assignment == PairAssignment::Cross) {
        for (const auto& w : cfg.water_types)
            for (std::size_t i = 0; i < images; ++i) cells.emplace_back(i, w);
        return cells;
    }
    if (images < cfg.water_types.size())
        throw ConfigError("pairs.assignment", "split needs at least one image per water type");
    std::vector<std::size_t> order(images);
    for (std::size_t i = 0; i < images; ++i) order[i] = i;
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x53504C4954ULL));
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t groups = cfg.water_types.size();
    for (std::size_t g = 0; g < groups; ++g)
        for (std::size_t k = g; k < images; k += groups) cells.emplace_back(order[k], cfg.water_types[g]);
    return cells;
}

/// Side-by-side composite with a white gutter.
inline ColorImage side_by_side(const ColorImage& left, const ColorImage& right, std::size_t gutter) {
    require_same_geometry(left, right, "side_by_side");
    const std::size_t h = left.height(), w = left.width();
    ColorImage out = make_color(h, 2 * w + gutter, 1.0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                out(y, x, c) = left(y, x, c);
                out(y, w + gutter + x, c) = right(y, x, c);
            }
    return out;
}

/// Emits reference/proposed pairs to <output>/pairs/<water>/<stem>.png with a
/// seeded left/right order; the answer key lands in the manifest.
inline RunResult run_pairs(const RunOptions& opt) {
    const BatchConfig cfg = load_batch_config(opt.config_path);
    const SpectralLibrary lib;
    const auto sources = discover_sources(cfg);
    const auto cells = pair_cells(cfg, sources.size());
    const auto key = pair_answer_key(cells.size(), cfg.seed);

    RunResult result;
    for (const auto& [img, water] : cells)
        result.outputs.push_back(fs::path("pairs") / water / (sources[img].stem + ".png"));

    result.manifest = detail::manifest_header(cfg, lib, "pairs");
    if (opt.dry_run) {
        result.manifest["dry_run"] = true;
        for (std::size_t k = 0; k < cells.size(); ++k)
            result.manifest["pairs"].push_back({{"image", sources[cells[k].first].stem},
                                                {"water", cells[k].second},
                                                {"left", key[k] ? "proposed" : "reference"},
                                                {"output", detail::rel_string(result.outputs[k])}});
        return result;
    }

    std::vector<json> entries(cells.size());
    std::mutex progress_mutex;
    std::size_t done = 0;
    detail::parallel_for(cells.size(), opt.jobs, [&](std::size_t k) {
        const auto& [img, water] = cells[k];
        const auto& src = sources[img];
        DegradationConfig params = cfg.params;
        params.water = water;
        params.seed = derive_seed(cfg.seed, img);
        json e = {{"pair", k},
                  {"image", src.stem},
                  {"source", fs::relative(src.image, cfg.input_dir).generic_string()},
                  {"depth", fs::relative(src.depth, cfg.depth_dir).generic_string()},
                  {"water", water},
                  {"field_seed", params.seed},
                  {"left", key[k] ? "proposed" : "reference"},
                  {"right", key[k] ? "reference" : "proposed"},
                  {"output", detail::rel_string(result.outputs[k])}};
        try {
            params.mode = Mode::Reference;
            const Rendering ref = detail::render_source(src, params, lib);
            params.mode = Mode::Proposed;
            const Rendering prop = detail::render_source(src, params, lib);
            e["params"] = params_json(params);
            e["params"].erase("mode");
            const ColorImage a = encode_srgb(key[k] ? prop.image : ref.image);
            const ColorImage b = encode_srgb(key[k] ? ref.image : prop.image);
            const auto out_path = cfg.output_dir / result.outputs[k];
            fs::create_directories(out_path.parent_path());
            save_image(out_path, side_by_side(a, b, cfg.pair_gutter), cfg.bit_depth);
            if (opt.emit_terms) {
                auto grid_path = out_path;
                grid_path.replace_filename(src.stem + "_terms.png");
                e["term_grid"] = fs::relative(emit_term_grid(prop.terms, grid_path), cfg.output_dir).generic_string();
            }
            e["status"] = "ok";
        } catch (const std::exception& ex) {
            e["status"] = "error";
            e["error"] = ex.what();
        }
        entries[k] = std::move(e);
        if (opt.progress) {
            std::lock_guard lock(progress_mutex);
            ++done;
            *opt.progress << "[" << done << "/" << cells.size() << "] pair " << water << "/" << src.stem << " "
                          << entries[k]["status"].get<std::string>() << '\n';
        }
    });

    std::size_t failed = 0;
    result.manifest["pairs"] = json::array();
    for (auto& e : entries) {
        if (e["status"] != "ok") ++failed;
        result.manifest["pairs"].push_back(std::move(e));
    }
    result.manifest["summary"] = {{"total", cells.size()}, {"ok", cells.size() - failed}, {"failed", failed}};
    fs::create_directories(cfg.output_dir);
    detail::write_manifest(cfg.output_dir / "manifest.json", result.manifest);
    result.exit_code = failed == 0 ? 0 : 2;
    return result;
}

} // namespace aquasynth
