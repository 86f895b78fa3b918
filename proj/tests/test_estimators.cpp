#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "pbp/estimators.hpp"
#include "pbp/eval.hpp"

using namespace pbp;

namespace {

PixelSelection select_indices(const LinearImage& img, std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end());
    return {img.height(), img.width(), idx};
}

void expect_direction(const Illuminant& e, const Rgb& v, double tol = 1e-12) {
    const Illuminant ref(v);
    for (int c = 0; c < 3; ++c)
        EXPECT_NEAR(e[c], ref[c], tol);
}

} // namespace

TEST(MinkowskiOrder, ParsesAndValidates) {
    EXPECT_TRUE(MinkowskiOrder::parse("inf").infinite());
    EXPECT_EQ(MinkowskiOrder::parse("7").value(), 7.0);
    EXPECT_EQ(MinkowskiOrder::parse("11").to_string(), "11");
    EXPECT_THROW(MinkowskiOrder::parse("0.5"), ParameterError);
    EXPECT_THROW(MinkowskiOrder::parse("seven"), ParameterError);
}

TEST(GrayPresets, MatchBaselineTable) {
    EXPECT_EQ(gray_preset(GrayMethod::gw), (GrayFrameworkParams{0, MinkowskiOrder(1), 0.0}));
    EXPECT_TRUE(gray_preset(GrayMethod::wp).minkowski_p.infinite());
    EXPECT_EQ(gray_preset(GrayMethod::sog), (GrayFrameworkParams{0, MinkowskiOrder(7), 0.0}));
    EXPECT_EQ(gray_preset(GrayMethod::ggw), (GrayFrameworkParams{0, MinkowskiOrder(11), 1.0}));
    EXPECT_EQ(gray_preset(GrayMethod::ge1), (GrayFrameworkParams{1, MinkowskiOrder(7), 1.0}));
    EXPECT_EQ(gray_preset(GrayMethod::ge2), (GrayFrameworkParams{2, MinkowskiOrder(7), 1.0}));
    EXPECT_EQ(parse_gray_method("ge2"), GrayMethod::ge2);
    EXPECT_FALSE(parse_gray_method("bp").has_value());
}

TEST(MinkowskiEstimate, MeanOfTwoPixels) {
    LinearImage img(1, 2);
    img.set_pixel(0, {0.2, 0.1, 0.1});
    img.set_pixel(1, {0.4, 0.1, 0.3});
    const auto e = minkowski_estimate(img, MinkowskiOrder(1));
    EXPECT_NEAR(e[0], 0.8018, 1e-4);
    EXPECT_NEAR(e[1], 0.2673, 1e-4);
    EXPECT_NEAR(e[2], 0.5345, 1e-4);
}

TEST(MinkowskiEstimate, InfinityIsChannelMax) {
    LinearImage img(1, 2);
    img.set_pixel(0, {0.1, 0.2, 0.3});
    img.set_pixel(1, {0.4, 0.1, 0.1});
    expect_direction(minkowski_estimate(img, MinkowskiOrder::infinity()), {0.4, 0.2, 0.3});
}

TEST(MinkowskiEstimate, SinglePixelAnyOrder) {
    std::mt19937_64 rng(2);
    const auto img = oracle::random_image(rng, 4, 4);
    const auto sel = select_indices(img, {5});
    for (double p : {1.0, 2.0, 3.0, 7.0, 11.0})
        expect_direction(minkowski_estimate(img, sel, MinkowskiOrder(p)), img.pixel(5), 1e-12);
    expect_direction(minkowski_estimate(img, sel, MinkowskiOrder::infinity()), img.pixel(5));
}

TEST(MinkowskiEstimate, ErrorPaths) {
    const LinearImage img(2, 2);
    EXPECT_THROW(minkowski_estimate(img, PixelSelection{2, 2, {}}, MinkowskiOrder(1)), EmptySelectionError);
    EXPECT_THROW(minkowski_estimate(img, MinkowskiOrder(1)), DegenerateEstimateError);
    EXPECT_THROW(minkowski_estimate(img, PixelSelection{3, 2, {0}}, MinkowskiOrder(1)), DimensionError);
}

TEST(MinkowskiEstimate, ScaleEquivariance) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto img = oracle::random_image(rng, 8, 8, 0.1);
        auto scaled = img;
        const double lambda = 0.25 + trial * 0.03;
        for (double& v : scaled.data())
            v *= lambda;
        for (MinkowskiOrder p : {MinkowskiOrder(1), MinkowskiOrder(2), MinkowskiOrder(7), MinkowskiOrder::infinity()}) {
            const auto a = minkowski_estimate(img, p);
            const auto b = minkowski_estimate(scaled, p);
            for (int c = 0; c < 3; ++c)
                EXPECT_NEAR(a[c], b[c], 1e-9);
        }
    }
}

TEST(MinkowskiEstimate, LargePApproachesMax) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto img = oracle::random_image(rng, 4, 4);
        EXPECT_LT(angular_error(minkowski_estimate(img, MinkowskiOrder(64)),
                                minkowski_estimate(img, MinkowskiOrder::infinity())),
                  1.0);
    }
}

TEST(GrayFramework, OracleEquivalenceForGrayWorld) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::size_t> dim(1, 16);
    for (int trial = 0; trial < 100; ++trial) {
        const auto img = oracle::random_image(rng, dim(rng), dim(rng), 0.2);
        if (img.valid_count() == 0)
            continue;
        const auto ref = oracle::minkowski(img, 1.0);
        const auto e = gray_framework_estimate(img, GrayMethod::gw);
        for (int c = 0; c < 3; ++c)
            EXPECT_NEAR(e[c], ref[c], 1e-12 * ref[c]);
    }
}

TEST(GrayFramework, UniformImages) {
    const Rgb v{0.7, 0.4, 0.2};
    const auto img = LinearImage::filled(6, 6, v);
    expect_direction(gray_framework_estimate(img, GrayMethod::gw), v);
    expect_direction(gray_framework_estimate(img, GrayMethod::ggw), v);
    EXPECT_THROW(gray_framework_estimate(img, GrayMethod::ge1), DegenerateEstimateError);
    EXPECT_THROW(gray_framework_estimate(img, GrayMethod::ge2), DegenerateEstimateError);
}

TEST(GrayFramework, WhitePatchTakesChannelMaxima) {
    LinearImage img(2, 2);
    img.set_pixel(0, {0.9, 0.1, 0.1});
    img.set_pixel(1, {0.2, 0.6, 0.1});
    img.set_pixel(2, {0.1, 0.1, 0.3});
    img.set_pixel(3, {0.5, 0.5, 0.2});
    expect_direction(gray_framework_estimate(img, GrayMethod::wp), {0.9, 0.6, 0.3});
}

TEST(GrayFramework, MaskedPixelsIgnored) {
    LinearImage img(1, 3);
    img.set_pixel(0, {0.5, 0.5, 0.5});
    img.set_pixel(1, {0.9, 0.1, 0.1});
    img.set_pixel(2, {0.5, 0.5, 0.5});
    img.set_valid(1, false);
    expect_direction(gray_framework_estimate(img, GrayMethod::gw), {1, 1, 1});
    expect_direction(gray_framework_estimate(img, GrayMethod::wp), {1, 1, 1});
}

TEST(GrayFramework, PermutationInvariantWithoutFilters) {
    std::mt19937_64 rng(41);
    const auto img = oracle::random_image(rng, 12, 10, 0.1);
    std::vector<std::size_t> perm(img.pixel_count());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    LinearImage shuffled(12, 10);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        shuffled.set_pixel(i, img.pixel(perm[i]));
        shuffled.set_valid(i, img.valid(perm[i]));
    }
    for (GrayMethod m : {GrayMethod::gw, GrayMethod::wp, GrayMethod::sog}) {
        const auto a = gray_framework_estimate(img, m);
        const auto b = gray_framework_estimate(shuffled, m);
        for (int c = 0; c < 3; ++c)
            EXPECT_NEAR(a[c], b[c], 1e-12);
    }
}

TEST(SampleBudget, CeilWithFloorOfOne) {
    EXPECT_EQ(sample_budget(100, 0.02), 2u);
    EXPECT_EQ(sample_budget(100, 0.07), 7u);  // 100*0.07 is 7.000000000000001 in binary
    EXPECT_EQ(sample_budget(101, 0.02), 3u);
    EXPECT_EQ(sample_budget(10, 0.001), 1u);
    EXPECT_EQ(sample_budget(4, 0.5), 2u);
    EXPECT_THROW(sample_budget(10, 0.0), ParameterError);
}

TEST(BrightPixels, SelectsSingleWhitePixel) {
    auto img = LinearImage::filled(10, 10, {0.01, 0.01, 0.01});
    img.set_pixel(3, 7, {1.0, 1.0, 1.0});
    expect_direction(bright_pixels_estimate(img, 0.01, gray_preset(GrayMethod::gw)), {1, 1, 1});
}

TEST(BrightPixels, TieBreakByRowMajorIndex) {
    LinearImage img(2, 2);
    img.set_pixel(0, {0.3, 0.3, 0.3});  // 0.9
    img.set_pixel(1, {0.2, 0.2, 0.2});  // 0.6
    img.set_pixel(2, {0.2, 0.2, 0.2});  // 0.6, exact tie
    img.set_pixel(3, {0.05, 0.03, 0.02});
    const auto sel = select_bright_pixels(img, 0.5);
    EXPECT_EQ(sel.indices, (std::vector<std::size_t>{0, 1}));
}

TEST(BrightPixels, FullSelectionEqualsGrayWorld) {
    std::mt19937_64 rng(51);
    const auto img = oracle::random_image(rng, 9, 11, 0.15);
    const auto bp = bright_pixels_estimate(img, 1.0, gray_preset(GrayMethod::gw));
    const auto gw = gray_framework_estimate(img, GrayMethod::gw);
    for (int c = 0; c < 3; ++c)
        EXPECT_NEAR(bp[c], gw[c], 1e-15);
}

TEST(BrightPixels, NeverSelectsMaskedPixels) {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        auto img = oracle::random_image(rng, 10, 10, 0.3);
        if (img.valid_count() == 0)
            continue;
        const auto sel = select_bright_pixels(img, 0.5);
        for (std::size_t i : sel.indices)
            EXPECT_TRUE(img.valid(i));
    }
    LinearImage none(2, 2);
    for (std::size_t i = 0; i < 4; ++i)
        none.set_valid(i, false);
    EXPECT_THROW(select_bright_pixels(none, 0.5), EmptySelectionError);
}
