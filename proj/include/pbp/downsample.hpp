#pragma once

#include <cstddef>

#include "pbp/error.hpp"
#include "pbp/image.hpp"

namespace pbp {

struct DownsampleParams {
    std::size_t interval = 1;
};

// Keeps the center pixel, at offset floor(S/2), of every full S x S block.
// Partial blocks at the right and bottom edges are dropped. Data and mask are
// copied verbatim; no interpolation.
inline LinearImage equidistant_downsample(const LinearImage& image, DownsampleParams params) {
    const std::size_t s = params.interval;
    if (s < 1)
        throw ParameterError("downsampling interval must be >= 1");
    if (image.height() < s || image.width() < s)
        throw DimensionError("image smaller than the downsampling interval");
    if (s == 1)
        return image;

    const std::size_t out_h = image.height() / s;
    const std::size_t out_w = image.width() / s;
    const std::size_t offset = s / 2;
    LinearImage out(out_h, out_w);
    for (std::size_t i = 0; i < out_h; ++i) {
        const std::size_t src_row = i * s + offset;
        for (std::size_t j = 0; j < out_w; ++j) {
            const std::size_t src = image.index(src_row, j * s + offset);
            out.set_pixel(i * out_w + j, image.pixel(src));
            out.set_valid(i * out_w + j, image.valid(src));
        }
    }
    return out;
}

inline LinearImage equidistant_downsample(const LinearImage& image, std::size_t interval) {
    return equidistant_downsample(image, DownsampleParams{interval});
}

} // namespace pbp
