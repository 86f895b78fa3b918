#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pbp/error.hpp"
#include "pbp/image.hpp"

namespace pbp {

// Single-channel raster, row-major.
struct ScalarRaster {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
    double at(std::size_t row, std::size_t col) const noexcept { return values[row * width + col]; }
};

// Pixel brightness R+G+B. Masked pixels get 0 so they never win a selection.
inline ScalarRaster brightness_map(const LinearImage& image) {
    ScalarRaster out{image.height(), image.width(), std::vector<double>(image.pixel_count(), 0.0)};
    auto data = image.data();
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (image.valid(i))
            out.values[i] = data[3 * i] + data[3 * i + 1] + data[3 * i + 2];
    return out;
}

// Number of pixels to select out of pixel_count at rate fraction:
// max(1, ceil(N * fraction)). Products within 1e-9 of an integer are snapped
// first so that e.g. 100 * 0.07 selects 7, not 8.
inline std::size_t sample_budget(std::size_t pixel_count, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ParameterError("sample fraction must lie in (0,1]");
    const double raw = static_cast<double>(pixel_count) * fraction;
    const double nearest = std::round(raw);
    const double snapped = std::abs(raw - nearest) <= 1e-9 * std::max(1.0, raw) ? nearest : std::ceil(raw);
    const auto n = static_cast<std::size_t>(snapped);
    return n < 1 ? 1 : n;
}

} // namespace pbp
