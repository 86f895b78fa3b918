#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pbp/brightness.hpp"
#include "pbp/error.hpp"
#include "pbp/filters.hpp"
#include "pbp/image.hpp"

namespace pbp {

// Minkowski norm order p >= 1, or infinity (channel-wise maximum).
class MinkowskiOrder {
public:
    MinkowskiOrder() = default;
    MinkowskiOrder(double p) : p_(p) {  // NOLINT(google-explicit-constructor)
        if (!(p >= 1.0))
            throw ParameterError("Minkowski order must be >= 1 or inf");
    }

    static MinkowskiOrder infinity() { return MinkowskiOrder(std::numeric_limits<double>::infinity()); }

    static MinkowskiOrder parse(std::string_view text) {
        if (text == "inf" || text == "infinity" || text == "max")
            return infinity();
        try {
            std::size_t used = 0;
            const double p = std::stod(std::string(text), &used);
            if (used != text.size())
                throw ParameterError("bad Minkowski order '" + std::string(text) + "'");
            return MinkowskiOrder(p);
        } catch (const std::logic_error&) {
            throw ParameterError("bad Minkowski order '" + std::string(text) + "'");
        }
    }

    bool infinite() const noexcept { return std::isinf(p_); }
    double value() const noexcept { return p_; }

    std::string to_string() const {
        if (infinite())
            return "inf";
        if (p_ == std::floor(p_))
            return std::to_string(static_cast<long long>(p_));
        return std::to_string(p_);
    }

    friend bool operator==(const MinkowskiOrder&, const MinkowskiOrder&) = default;
    friend auto operator<=>(const MinkowskiOrder&, const MinkowskiOrder&) = default;

private:
    double p_ = 1.0;
};

// One member of the Gray-World family: smoothing scale, derivative order k
// and Minkowski order p.
struct GrayFrameworkParams {
    int derivative_order = 0;
    MinkowskiOrder minkowski_p{1.0};
    double smoothing_sigma = 0.0;

    void validate() const {
        if (derivative_order < 0 || derivative_order > 2)
            throw ParameterError("derivative order must be 0, 1 or 2");
        if (!(smoothing_sigma >= 0.0))
            throw ParameterError("smoothing sigma must be >= 0");
    }

    friend bool operator==(const GrayFrameworkParams&, const GrayFrameworkParams&) = default;
};

enum class GrayMethod { gw, wp, sog, ggw, ge1, ge2 };

// Baseline parameters: GW (0,1,0), WP (0,inf,0), SoG (0,7,0), GGW (0,11,1),
// GE1 (1,7,1), GE2 (2,7,1) as (k, p, sigma).
inline GrayFrameworkParams gray_preset(GrayMethod m) {
    switch (m) {
    case GrayMethod::gw: return {0, MinkowskiOrder(1.0), 0.0};
    case GrayMethod::wp: return {0, MinkowskiOrder::infinity(), 0.0};
    case GrayMethod::sog: return {0, MinkowskiOrder(7.0), 0.0};
    case GrayMethod::ggw: return {0, MinkowskiOrder(11.0), 1.0};
    case GrayMethod::ge1: return {1, MinkowskiOrder(7.0), 1.0};
    case GrayMethod::ge2: return {2, MinkowskiOrder(7.0), 1.0};
    }
    throw ParameterError("unknown gray method");
}

inline std::string_view gray_method_name(GrayMethod m) {
    switch (m) {
    case GrayMethod::gw: return "gw";
    case GrayMethod::wp: return "wp";
    case GrayMethod::sog: return "sog";
    case GrayMethod::ggw: return "ggw";
    case GrayMethod::ge1: return "ge1";
    case GrayMethod::ge2: return "ge2";
    }
    return "?";
}

inline std::optional<GrayMethod> parse_gray_method(std::string_view name) {
    for (GrayMethod m : {GrayMethod::gw, GrayMethod::wp, GrayMethod::sog, GrayMethod::ggw, GrayMethod::ge1,
                         GrayMethod::ge2})
        if (gray_method_name(m) == name)
            return m;
    return std::nullopt;
}

// Set of pixel positions, kept as sorted row-major linear indices into an
// image of the recorded extent.
struct PixelSelection {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::size_t> indices;

    std::size_t size() const noexcept { return indices.size(); }
    bool empty() const noexcept { return indices.empty(); }

    friend bool operator==(const PixelSelection&, const PixelSelection&) = default;
};

inline PixelSelection all_valid_pixels(const LinearImage& image) {
    PixelSelection sel{image.height(), image.width(), {}};
    sel.indices.reserve(image.pixel_count());
    for (std::size_t i = 0; i < image.pixel_count(); ++i)
        if (image.valid(i))
            sel.indices.push_back(i);
    return sel;
}

// Per-channel mean-power Minkowski norm over the selected pixels, returned as
// a unit direction. p = inf takes the channel-wise maximum.
inline Illuminant minkowski_estimate(const LinearImage& image, const PixelSelection& selection, MinkowskiOrder p) {
    if (selection.empty())
        throw EmptySelectionError("no pixels selected for the Minkowski estimate");
    if (selection.height != image.height() || selection.width != image.width())
        throw DimensionError("selection does not index this image");

    auto data = image.data();
    Rgb acc{0.0, 0.0, 0.0};
    if (p.infinite()) {
        for (std::size_t i : selection.indices)
            for (int c = 0; c < 3; ++c)
                acc[c] = std::max(acc[c], data[3 * i + c]);
    } else {
        const double pv = p.value();
        if (pv == 1.0) {
            for (std::size_t i : selection.indices)
                for (int c = 0; c < 3; ++c)
                    acc[c] += data[3 * i + c];
        } else if (pv == 2.0) {
            for (std::size_t i : selection.indices)
                for (int c = 0; c < 3; ++c)
                    acc[c] += data[3 * i + c] * data[3 * i + c];
        } else {
            for (std::size_t i : selection.indices)
                for (int c = 0; c < 3; ++c)
                    acc[c] += std::pow(data[3 * i + c], pv);
        }
        const double n = static_cast<double>(selection.size());
        for (int c = 0; c < 3; ++c)
            acc[c] = pv == 1.0 ? acc[c] / n : std::pow(acc[c] / n, 1.0 / pv);
    }
    if (!(acc[0] > 0.0 || acc[1] > 0.0 || acc[2] > 0.0))
        throw DegenerateEstimateError("all selected responses are zero");
    return Illuminant(acc);
}

inline Illuminant minkowski_estimate(const LinearImage& image, MinkowskiOrder p) {
    return minkowski_estimate(image, all_valid_pixels(image), p);
}

// Smoothing followed by the optional derivative: the domain the Minkowski
// norm (and, for BP/PBP, the brightness ranking) operates on.
inline LinearImage apply_gray_filters(const LinearImage& image, const GrayFrameworkParams& params) {
    params.validate();
    LinearImage filtered = gaussian_smooth(image, params.smoothing_sigma);
    if (params.derivative_order > 0)
        filtered = spatial_derivative(filtered, params.derivative_order);
    return filtered;
}

inline Illuminant gray_framework_estimate(const LinearImage& image, const GrayFrameworkParams& params) {
    return minkowski_estimate(apply_gray_filters(image, params), params.minkowski_p);
}

inline Illuminant gray_framework_estimate(const LinearImage& image, GrayMethod method) {
    return gray_framework_estimate(image, gray_preset(method));
}

// Globally brightest ceil(N * fraction) valid pixels of an already filtered
// image, N counting every raster pixel. Ties go to the lower row-major index.
inline PixelSelection select_bright_pixels(const LinearImage& filtered, double fraction) {
    const std::size_t budget = sample_budget(filtered.pixel_count(), fraction);
    const ScalarRaster brightness = brightness_map(filtered);
    PixelSelection sel = all_valid_pixels(filtered);
    if (sel.empty())
        throw EmptySelectionError("image has no valid pixels");
    std::stable_sort(sel.indices.begin(), sel.indices.end(),
                     [&](std::size_t a, std::size_t b) { return brightness[a] > brightness[b]; });
    sel.indices.resize(std::min(budget, sel.indices.size()));
    std::sort(sel.indices.begin(), sel.indices.end());
    return sel;
}

// Bright Pixels: filter per the base params, rank by brightness of the
// filtered image, take the Minkowski norm of the top fraction.
inline Illuminant bright_pixels_estimate(const LinearImage& image, double fraction, const GrayFrameworkParams& base) {
    const LinearImage filtered = apply_gray_filters(image, base);
    return minkowski_estimate(filtered, select_bright_pixels(filtered, fraction), base.minkowski_p);
}

} // namespace pbp
