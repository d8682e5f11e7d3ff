#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "aquasynth/batch.hpp"
#include "oracles.hpp"

using namespace aquasynth;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes `count` small images with PFM depth maps into <root>/in.
void make_inputs(const fs::path& root, std::size_t count, std::size_t h = 24, std::size_t w = 32) {
    fs::create_directories(root / "in");
    std::mt19937_64 rng(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::string stem = "img" + std::to_string(i);
        ColorImage img = oracle::random_image(h, w, rng);
        for (double& v : img.values()) v = std::floor(v * 255.0) / 255.0;
        save_image(root / "in" / (stem + ".png"), img);
        Plane depth = make_plane(h, w);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) depth(y, x) = static_cast<double>(x + y) + 0.1 * static_cast<double>(i);
        write_pfm(root / "in" / (stem + ".pfm"), depth);
    }
}

fs::path write_config(const fs::path& root, const json& cfg, const std::string& name = "config.json") {
    const auto p = root / name;
    std::ofstream(p) << cfg.dump(2);
    return p;
}

json base_config() {
    return {{"input", {{"dir", "in"}}}, {"output", {{"dir", "out"}}}, {"seed", 2024}};
}

RunOptions options(const fs::path& config, unsigned jobs = 2) {
    RunOptions o;
    o.config_path = config;
    o.jobs = jobs;
    return o;
}

std::string config_error_key(const json& cfg) {
    oracle::TempDir tmp("cfg");
    try {
        parse_batch_config(cfg, tmp.path());
    } catch (const ConfigError& e) {
        return e.key_path();
    }
    return "<none>";
}

} // namespace

TEST(RunBatch, ProductOfCells) {
    oracle::TempDir tmp("batch");
    make_inputs(tmp.path(), 2);
    auto cfg = base_config();
    cfg["water_types"] = {"IA", "9C"};
    const auto res = run_batch(options(write_config(tmp.path(), cfg)));
    EXPECT_EQ(res.exit_code, 0);
    ASSERT_EQ(res.outputs.size(), 8u);
    for (const auto& p : res.outputs) EXPECT_TRUE(fs::exists(tmp.path() / "out" / p)) << p;
    EXPECT_TRUE(fs::exists(tmp.path() / "out" / "9C" / "proposed" / "img1.png"));
    EXPECT_TRUE(fs::exists(tmp.path() / "out" / "manifest.json"));
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(tmp.path() / "out"))
        if (e.is_regular_file()) ++files;
    EXPECT_EQ(files, 9u);
    EXPECT_EQ(res.manifest["summary"]["ok"], 8);
}

TEST(RunBatch, RerunIsByteIdentical) {
    oracle::TempDir tmp("batch");
    make_inputs(tmp.path(), 2);
    auto cfg = base_config();
    cfg["water_types"] = {"3C", "7C"};
    const auto first = run_batch(options(write_config(tmp.path(), cfg), 1));
    std::vector<std::string> bytes;
    for (const auto& p : first.outputs) bytes.push_back(slurp(tmp.path() / "out" / p));
    const auto manifest = slurp(tmp.path() / "out" / "manifest.json");

    const auto second = run_batch(options(tmp.path() / "config.json", 3));
    ASSERT_EQ(second.outputs, first.outputs);
    for (std::size_t k = 0; k < bytes.size(); ++k) EXPECT_EQ(slurp(tmp.path() / "out" / second.outputs[k]), bytes[k]);
    EXPECT_EQ(slurp(tmp.path() / "out" / "manifest.json"), manifest);
}

TEST(RunBatch, ManifestRecordsDefaults) {
    oracle::TempDir tmp("batch");
    make_inputs(tmp.path(), 1);
    auto cfg = base_config();
    cfg["water_types"] = {"9C"};
    cfg["modes"] = {"proposed"};
    const auto res = run_batch(options(write_config(tmp.path(), cfg)));
    const auto& m = res.manifest;
    EXPECT_EQ(m["software"]["name"], "aquasynth");
    EXPECT_EQ(m["software"]["version"], std::string(kVersion));
    EXPECT_EQ(m["seed"], 2024);
    EXPECT_FALSE(m["config_hash"].get<std::string>().empty());
    ASSERT_EQ(m["jobs"].size(), 1u);
    const auto& p = m["jobs"][0]["params"];
    EXPECT_EQ(p["g"], 0.2);
    EXPECT_EQ(p["mu"], 0.3);
    EXPECT_EQ(p["phi_factor"], 0.3);
    EXPECT_EQ(m["jobs"][0]["water"], "9C");
    EXPECT_TRUE(m["jobs"][0].contains("coefficients"));
    const json on_disk = json::parse(slurp(tmp.path() / "out" / "manifest.json"));
    EXPECT_EQ(on_disk, m);
}

TEST(RunBatch, DryRunWritesNothing) {
    oracle::TempDir tmp("batch");
    make_inputs(tmp.path(), 2);
    auto opt = options(write_config(tmp.path(), base_config()));
    opt.dry_run = true;
    const auto res = run_batch(opt);
    EXPECT_EQ(res.outputs.size(), 2u * 9u * 2u);
    EXPECT_FALSE(fs::exists(tmp.path() / "out"));
}

TEST(RunBatch, EmitTermsWritesGrids) {
    oracle::TempDir tmp("batch");
    make_inputs(tmp.path(), 1);
    auto cfg = base_config();
    cfg["water_types"] = {"5C"};
    cfg["modes"] = {"proposed"};
    auto opt = options(write_config(tmp.path(), cfg));
    opt.emit_terms = true;
    const auto res = run_batch(opt);
    const auto grid = res.manifest["jobs"][0]["term_grid"].get<std::string>();
    ASSERT_TRUE(fs::exists(tmp.path() / "out" / grid));
    const auto img = load_image(tmp.path() / "out" / grid);
    EXPECT_EQ(img.width(), 3 * 32 + 2 * kTermGridGutter);
}

TEST(RunBatch, SixteenBitOutput) {
    oracle::TempDir tmp("batch");
    make_inputs(tmp.path(), 1);
    auto cfg = base_config();
    cfg["water_types"] = {"5C"};
    cfg["modes"] = {"reference"};
    cfg["output"]["bit_depth"] = 16;
    const auto res = run_batch(options(write_config(tmp.path(), cfg)));
    const auto bytes = slurp(tmp.path() / "out" / res.outputs[0]);
    ASSERT_GT(bytes.size(), 25u);
    EXPECT_EQ(static_cast<unsigned char>(bytes[24]), 16); // IHDR bit depth
}

TEST(RunBatch, MissingDepthListsStems) {
    oracle::TempDir tmp("batch");
    make_inputs(tmp.path(), 3);
    fs::remove(tmp.path() / "in" / "img0.pfm");
    fs::remove(tmp.path() / "in" / "img2.pfm");
    try {
        run_batch(options(write_config(tmp.path(), base_config())));
        FAIL() << "expected an error";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("img0"), std::string::npos);
        EXPECT_NE(msg.find("img2"), std::string::npos);
        EXPECT_EQ(msg.find("img1"), std::string::npos);
    }
    EXPECT_FALSE(fs::exists(tmp.path() / "out"));
}

TEST(RunBatch, PngDepthSiblings) {
    oracle::TempDir tmp("batch");
    fs::create_directories(tmp.path() / "in");
    std::mt19937_64 rng(1);
    save_image(tmp.path() / "in" / "a.png", oracle::random_image(8, 8, rng));
    save_image(tmp.path() / "in" / "a_depth.png", oracle::random_plane(8, 8, rng, 0.0, 1.0), 16);
    save_image(tmp.path() / "in" / "b.png", oracle::random_image(8, 8, rng));
    save_image(tmp.path() / "in" / "b.depth.png", oracle::random_plane(8, 8, rng, 0.0, 1.0));
    BatchConfig cfg;
    cfg.input_dir = cfg.depth_dir = tmp.path() / "in";
    const auto src = discover_sources(cfg);
    ASSERT_EQ(src.size(), 2u);
    EXPECT_EQ(src[0].stem, "a");
    EXPECT_EQ(src[0].depth.filename(), "a_depth.png");
    EXPECT_EQ(src[1].depth.filename(), "b.depth.png");
}

TEST(RunBatch, PartialFailureIsRecorded) {
    oracle::TempDir tmp("batch");
    make_inputs(tmp.path(), 2);
    // Constant depth cannot be range-scaled.
    write_pfm(tmp.path() / "in" / "img1.pfm", make_plane(24, 32, 3.0));
    auto cfg = base_config();
    cfg["water_types"] = {"5C"};
    const auto res = run_batch(options(write_config(tmp.path(), cfg)));
    EXPECT_NE(res.exit_code, 0);
    EXPECT_EQ(res.manifest["summary"]["failed"], 2);
    EXPECT_EQ(res.manifest["summary"]["ok"], 2);
    EXPECT_TRUE(fs::exists(tmp.path() / "out" / "manifest.json"));
}

TEST(RunPairs, SurveyCountCross) {
    oracle::TempDir tmp("pairs");
    make_inputs(tmp.path(), 2);
    auto opt = options(write_config(tmp.path(), base_config()));
    const auto res = run_pairs(opt);
    EXPECT_EQ(res.exit_code, 0);
    EXPECT_EQ(res.outputs.size(), 18u);
    EXPECT_EQ(res.manifest["pairs"].size(), 18u);
    for (const auto& p : res.outputs) EXPECT_TRUE(fs::exists(tmp.path() / "out" / p));
    const auto img = load_image(tmp.path() / "out" / res.outputs[0]);
    EXPECT_EQ(img.width(), 2 * 32 + 8u);
}

TEST(RunPairs, SurveyCountSplit) {
    oracle::TempDir tmp("pairs");
    make_inputs(tmp.path(), 18, 8, 8);
    auto cfg = base_config();
    cfg["pairs"] = {{"assignment", "split"}};
    auto opt = options(write_config(tmp.path(), cfg));
    opt.dry_run = true;
    const auto res = run_pairs(opt);
    EXPECT_EQ(res.outputs.size(), 18u);
    std::set<std::string> images;
    std::map<std::string, int> per_water;
    for (const auto& p : res.manifest["pairs"]) {
        images.insert(p["image"].get<std::string>());
        ++per_water[p["water"].get<std::string>()];
    }
    EXPECT_EQ(images.size(), 18u);
    EXPECT_EQ(per_water.size(), 9u);
    for (const auto& [w, n] : per_water) EXPECT_EQ(n, 2) << w;
    EXPECT_FALSE(fs::exists(tmp.path() / "out"));
}

TEST(RunPairs, AnswerKeySeededAndBalanced) {
    for (std::size_t n : {1u, 2u, 17u, 18u, 101u}) {
        const auto key = pair_answer_key(n, 5);
        EXPECT_EQ(key, pair_answer_key(n, 5));
        const auto left = static_cast<long>(std::count(key.begin(), key.end(), true));
        const auto right = static_cast<long>(n) - left;
        EXPECT_LE(std::abs(left - right), 1);
    }
    EXPECT_NE(pair_answer_key(64, 1), pair_answer_key(64, 2));
}

TEST(RunPairs, AnswerKeyMatchesImages) {
    oracle::TempDir tmp("pairs");
    make_inputs(tmp.path(), 2, 12, 12);
    auto cfg = base_config();
    cfg["water_types"] = {"9C"};
    cfg["params"] = {{"field", {{"enabled", false}}}};
    const auto res = run_pairs(options(write_config(tmp.path(), cfg)));
    ASSERT_EQ(res.exit_code, 0);
    const auto bcfg = load_batch_config(tmp.path() / "config.json");
    const SpectralLibrary lib;
    const auto sources = discover_sources(bcfg);
    for (std::size_t k = 0; k < res.outputs.size(); ++k) {
        const auto& entry = res.manifest["pairs"][k];
        const auto stem = entry["image"].get<std::string>();
        const auto src = std::find_if(sources.begin(), sources.end(), [&](auto& s) { return s.stem == stem; });
        DegradationConfig p = bcfg.params;
        p.water = "9C";
        p.mode = Mode::Reference;
        const auto ref = encode_srgb(detail::render_source(*src, p, lib).image);
        const auto pair = load_image(tmp.path() / "out" / res.outputs[k]);
        const std::size_t x0 = entry["left"] == "reference" ? 0 : 12 + 8;
        double err = 0.0;
        for (std::size_t y = 0; y < 12; ++y)
            for (std::size_t x = 0; x < 12; ++x)
                for (std::size_t c = 0; c < 3; ++c) err = std::max(err, std::abs(pair(y, x0 + x, c) - ref(y, x, c)));
        EXPECT_LE(err, 1.0 / 510.0 + 1e-12) << stem;
    }
}

TEST(Config, ErrorsCarryKeyPaths) {
    auto cfg = base_config();
    cfg["params"] = {{"g", 1.5}};
    EXPECT_EQ(config_error_key(cfg), "params.g");
    cfg["params"] = {{"field", {{"lo", "x"}}}};
    EXPECT_EQ(config_error_key(cfg), "params.field.lo");
    cfg["params"] = {{"bogus", 1}};
    EXPECT_EQ(config_error_key(cfg), "params.bogus");
    cfg = base_config();
    cfg["water_types"] = {"IA", "4C"};
    EXPECT_EQ(config_error_key(cfg), "water_types[1]");
    cfg = base_config();
    cfg["modes"] = {"both"};
    EXPECT_EQ(config_error_key(cfg), "modes[0]");
    cfg = base_config();
    cfg.erase("input");
    EXPECT_EQ(config_error_key(cfg), "input");
    cfg = base_config();
    cfg["output"]["bit_depth"] = 12;
    EXPECT_EQ(config_error_key(cfg), "output.bit_depth");
    cfg = base_config();
    cfg["params"] = {{"coefficient_override", {{"beta", {0.1, 0.2}}}}};
    EXPECT_EQ(config_error_key(cfg), "params.coefficient_override.beta");
    cfg = base_config();
    cfg["pairs"] = {{"assignment", "random"}};
    EXPECT_EQ(config_error_key(cfg), "pairs.assignment");
}

TEST(Config, ParsesEveryParam) {
    oracle::TempDir tmp("cfg");
    auto cfg = base_config();
    cfg["params"] = {{"g", 0.4},
                     {"mu", 0.5},
                     {"phi_factor", 0.1},
                     {"d", 3.0},
                     {"z_min", 0.5},
                     {"z_max", 9.0},
                     {"gamma", 2.0},
                     {"px_per_unit", 4.0},
                     {"invert_depth", true},
                     {"field", {{"exponent", 2.5}, {"lo", 0.8}, {"hi", 1.2}, {"enabled", false}}},
                     {"coefficient_override", {{"beta", {0.3, 0.2, 0.1}}, {"backlight", {0.1, 0.2, 0.3}}}}};
    const auto b = parse_batch_config(cfg, tmp.path());
    const auto& p = b.params;
    EXPECT_EQ(p.g, 0.4);
    EXPECT_EQ(p.mu, 0.5);
    EXPECT_EQ(p.phi_factor, 0.1);
    EXPECT_EQ(p.vertical_depth, 3.0);
    EXPECT_EQ(p.scaling.z_min, 0.5);
    EXPECT_EQ(p.scaling.z_max, 9.0);
    EXPECT_EQ(p.scaling.gamma, 2.0);
    EXPECT_TRUE(p.scaling.invert);
    EXPECT_EQ(p.px_per_unit, 4.0);
    EXPECT_EQ(p.field.exponent, 2.5);
    EXPECT_FALSE(p.field_enabled);
    ASSERT_TRUE(p.coefficient_override.has_value());
    EXPECT_EQ(p.coefficient_override->beta[2], 0.1);
    EXPECT_EQ((*p.coefficient_override->backlight)[0], 0.1);
    EXPECT_EQ(b.input_dir, tmp.path() / "in");
    EXPECT_EQ(b.seed, 2024u);
}

TEST(Config, HashTracksContent) {
    oracle::TempDir tmp("cfg");
    auto cfg = base_config();
    const auto a = parse_batch_config(cfg, tmp.path()).hash;
    EXPECT_EQ(a, parse_batch_config(cfg, tmp.path()).hash);
    cfg["seed"] = 2025;
    EXPECT_NE(a, parse_batch_config(cfg, tmp.path()).hash);
}

TEST(Config, InvalidJson) {
    oracle::TempDir tmp("cfg");
    std::ofstream(tmp.path() / "c.json") << "{ not json";
    EXPECT_THROW(load_batch_config(tmp.path() / "c.json"), ConfigError);
}
