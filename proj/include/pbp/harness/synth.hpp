#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "pbp/error.hpp"
#include "pbp/image.hpp"

namespace pbp::harness {

// Synthetic scene: per-pixel random reflectance in [0,1]^3 lit by one
// illuminant (max component 1), optionally overpainted with flat Mondrian
// rectangles, with square white blobs scattered over the frame and optional
// saturated-color bright distractor blobs. Pixel values are
// reflectance * illuminant, so the ground truth is exact.
struct SynthConfig {
    std::size_t height = 64;
    std::size_t width = 96;
    double white_fraction = 0.02;     // approximate share of white pixels
    std::size_t white_blob = 2;       // side of each white square
    double distractor_fraction = 0.0;
    std::size_t distractor_blob = 8;
    double illuminant_min = 0.3;      // per-channel lower bound before max-normalization
    // Flat random-reflectance rectangles painted over the per-pixel
    // background; 0 keeps the background only.
    std::size_t mondrian_rects = 0;
    std::size_t mondrian_min = 4;
    std::size_t mondrian_max = 24;
};

struct SynthScene {
    LinearImage image;
    Rgb illuminant{1.0, 1.0, 1.0};  // max-normalized
};

namespace detail {

inline void stamp_blobs(LinearImage& img, std::mt19937_64& rng, double fraction, std::size_t side,
                        const auto& reflectance_fn, const Rgb& e) {
    if (fraction <= 0.0 || side == 0)
        return;
    side = std::min({side, img.height(), img.width()});
    const double target = fraction * static_cast<double>(img.pixel_count());
    const auto blobs = static_cast<std::size_t>(std::max(1.0, std::round(target / static_cast<double>(side * side))));
    std::uniform_int_distribution<std::size_t> row(0, img.height() - side);
    std::uniform_int_distribution<std::size_t> col(0, img.width() - side);
    for (std::size_t b = 0; b < blobs; ++b) {
        const std::size_t r0 = row(rng);
        const std::size_t c0 = col(rng);
        const Rgb refl = reflectance_fn();
        for (std::size_t r = r0; r < r0 + side; ++r)
            for (std::size_t c = c0; c < c0 + side; ++c)
                img.set_pixel(r, c, {refl[0] * e[0], refl[1] * e[1], refl[2] * e[2]});
    }
}

} // namespace detail

inline Rgb random_illuminant(std::mt19937_64& rng, double min_component = 0.3) {
    std::uniform_real_distribution<double> u(min_component, 1.0);
    Rgb e{u(rng), u(rng), u(rng)};
    const double m = std::max({e[0], e[1], e[2]});
    return {e[0] / m, e[1] / m, e[2] / m};
}

inline SynthScene make_synthetic_scene(const SynthConfig& cfg, const Rgb& illuminant, std::mt19937_64& rng) {
    if (cfg.height == 0 || cfg.width == 0)
        throw DimensionError("synthetic scene needs a nonzero extent");
    const double m = std::max({illuminant[0], illuminant[1], illuminant[2]});
    if (!(m > 0.0))
        throw ParameterError("synthetic illuminant must be nonzero");
    const Rgb e{illuminant[0] / m, illuminant[1] / m, illuminant[2] / m};

    SynthScene scene{LinearImage(cfg.height, cfg.width), e};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < scene.image.pixel_count(); ++i)
        scene.image.set_pixel(i, {u(rng) * e[0], u(rng) * e[1], u(rng) * e[2]});

    if (cfg.mondrian_rects > 0) {
        if (cfg.mondrian_min < 1 || cfg.mondrian_min > cfg.mondrian_max)
            throw ParameterError("mondrian side range must satisfy 1 <= min <= max");
        std::uniform_int_distribution<std::size_t> side(cfg.mondrian_min, cfg.mondrian_max);
        for (std::size_t k = 0; k < cfg.mondrian_rects; ++k) {
            const std::size_t h = std::min(side(rng), cfg.height), w = std::min(side(rng), cfg.width);
            const std::size_t r0 = std::uniform_int_distribution<std::size_t>(0, cfg.height - h)(rng);
            const std::size_t c0 = std::uniform_int_distribution<std::size_t>(0, cfg.width - w)(rng);
            const Rgb refl{u(rng), u(rng), u(rng)};
            for (std::size_t r = r0; r < r0 + h; ++r)
                for (std::size_t c = c0; c < c0 + w; ++c)
                    scene.image.set_pixel(r, c, {refl[0] * e[0], refl[1] * e[1], refl[2] * e[2]});
        }
    }

    detail::stamp_blobs(scene.image, rng, cfg.distractor_fraction, cfg.distractor_blob, [&] {
        Rgb r{u(rng) * 0.3, u(rng) * 0.3, u(rng) * 0.3};
        r[std::uniform_int_distribution<int>(0, 2)(rng)] = 1.0;
        return r;
    }, e);
    detail::stamp_blobs(scene.image, rng, cfg.white_fraction, cfg.white_blob, [] { return Rgb{1.0, 1.0, 1.0}; }, e);
    return scene;
}

inline SynthScene make_synthetic_scene(const SynthConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Rgb e = random_illuminant(rng, cfg.illuminant_min);
    return make_synthetic_scene(cfg, e, rng);
}

} // namespace pbp::harness
