#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "aquasynth/field.hpp"
#include "oracles.hpp"

using namespace aquasynth;

TEST(Grf, FixedSeedIsBitIdentical) {
    FieldConfig cfg;
    cfg.seed = 1234;
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{2, 2}, {37, 53}, {128, 96}})
        EXPECT_EQ(generate_grf(h, w, cfg), generate_grf(h, w, cfg));
}

TEST(Grf, RangeIsExact) {
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL, 0xDEADBEEFULL}) {
        FieldConfig cfg;
        cfg.seed = seed;
        const auto f = generate_grf(64, 80, cfg);
        const auto [mn, mx] = std::minmax_element(f.values().begin(), f.values().end());
        EXPECT_EQ(*mn, 0.7);
        EXPECT_EQ(*mx, 1.3);
    }
}

TEST(Grf, CustomRangeIsExact) {
    FieldConfig cfg;
    cfg.lo = 0.85;
    cfg.hi = 1.05;
    cfg.seed = 5;
    const auto f = generate_grf(33, 33, cfg);
    EXPECT_EQ(*std::min_element(f.values().begin(), f.values().end()), 0.85);
    EXPECT_EQ(*std::max_element(f.values().begin(), f.values().end()), 1.05);
}

TEST(Grf, PeriodogramSlopeTracksExponent) {
    FieldConfig cfg;
    cfg.seed = 77;
    const double slope = oracle::periodogram_slope(generate_grf(256, 256, cfg));
    EXPECT_NEAR(slope, -3.0, 0.4);
}

TEST(Grf, PeriodogramSlopeOtherExponent) {
    FieldConfig cfg;
    cfg.exponent = 2.0;
    cfg.seed = 78;
    EXPECT_NEAR(oracle::periodogram_slope(generate_grf(128, 128, cfg)), -2.0, 0.4);
}

TEST(Grf, DistinctSeedsDecorrelate) {
    FieldConfig a, b;
    a.seed = derive_seed(42, 0);
    b.seed = derive_seed(42, 1);
    EXPECT_LT(std::abs(oracle::ncc(generate_grf(128, 128, a), generate_grf(128, 128, b))), 0.5);
}

TEST(Grf, DegenerateSizesThrow) {
    FieldConfig cfg;
    EXPECT_THROW(generate_grf(1, 16, cfg), DimensionError);
    EXPECT_THROW(generate_grf(16, 0, cfg), DimensionError);
}

TEST(Grf, InvalidConfigThrows) {
    FieldConfig cfg;
    cfg.lo = 1.2;
    EXPECT_THROW(generate_grf(8, 8, cfg), DomainError);
    cfg = {};
    cfg.exponent = 0.0;
    EXPECT_THROW(generate_grf(8, 8, cfg), DomainError);
}

TEST(DeriveSeed, DistinctForIndices) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
}

TEST(ModulateDepth, UnitFieldIsIdentity) {
    std::mt19937_64 rng(1);
    const auto z = oracle::random_plane(9, 7, rng, 1.0, 5.0);
    EXPECT_EQ(modulate_depth(z, make_plane(9, 7, 1.0)), z);
}

TEST(ModulateDepth, ConstantScaling) {
    const auto m = modulate_depth(make_plane(4, 4, 2.0), make_plane(4, 4, 1.3));
    for (double v : m.values()) EXPECT_DOUBLE_EQ(v, 2.6);
}

TEST(ModulateDepth, ElementwiseProduct) {
    std::mt19937_64 rng(2);
    const auto z = oracle::random_plane(8, 8, rng, 1.0, 5.0);
    const auto f = oracle::random_plane(8, 8, rng, 0.7, 1.3);
    const auto m = modulate_depth(z, f);
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x) EXPECT_EQ(m(y, x), z(y, x) * f(y, x));
}

TEST(ModulateDepth, ShapeMismatchThrows) {
    EXPECT_THROW(modulate_depth(make_plane(4, 4), make_plane(4, 5)), DimensionError);
}
