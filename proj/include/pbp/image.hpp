#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pbp/error.hpp"

namespace pbp {

using Rgb = std::array<double, 3>;

// H x W raster of linear RGB responses, interleaved row-major, plus a
// per-pixel validity mask (true = pixel takes part in estimation).
//
// Images loaded from disk hold values in [0,1]. Filtered images (derivative
// magnitudes) may exceed 1; nothing downstream relies on the upper bound.
class LinearImage {
public:
    LinearImage() = default;

    LinearImage(std::size_t height, std::size_t width)
        : height_(height), width_(width), data_(height * width * 3, 0.0), mask_(height * width, 1) {
        if (height == 0 || width == 0)
            throw DimensionError("image must be at least 1x1");
    }

    LinearImage(std::size_t height, std::size_t width, std::vector<double> data)
        : LinearImage(height, width) {
        if (data.size() != height * width * 3)
            throw DimensionError("pixel buffer size does not match 3*H*W");
        data_ = std::move(data);
    }

    static LinearImage filled(std::size_t height, std::size_t width, const Rgb& value) {
        LinearImage img(height, width);
        for (std::size_t i = 0; i < img.pixel_count(); ++i)
            img.set_pixel(i, value);
        return img;
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t pixel_count() const noexcept { return height_ * width_; }
    bool empty() const noexcept { return pixel_count() == 0; }

    std::size_t index(std::size_t row, std::size_t col) const noexcept { return row * width_ + col; }

    double at(std::size_t row, std::size_t col, int c) const noexcept {
        return data_[index(row, col) * 3 + c];
    }
    double& at(std::size_t row, std::size_t col, int c) noexcept {
        return data_[index(row, col) * 3 + c];
    }

    Rgb pixel(std::size_t i) const noexcept { return {data_[3 * i], data_[3 * i + 1], data_[3 * i + 2]}; }
    Rgb pixel(std::size_t row, std::size_t col) const noexcept { return pixel(index(row, col)); }

    void set_pixel(std::size_t i, const Rgb& v) noexcept {
        data_[3 * i] = v[0];
        data_[3 * i + 1] = v[1];
        data_[3 * i + 2] = v[2];
    }
    void set_pixel(std::size_t row, std::size_t col, const Rgb& v) noexcept { set_pixel(index(row, col), v); }

    bool valid(std::size_t i) const noexcept { return mask_[i] != 0; }
    bool valid(std::size_t row, std::size_t col) const noexcept { return valid(index(row, col)); }
    void set_valid(std::size_t i, bool v) noexcept { mask_[i] = v ? 1 : 0; }
    void set_valid(std::size_t row, std::size_t col, bool v) noexcept { set_valid(index(row, col), v); }

    std::size_t valid_count() const noexcept {
        return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
    }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    std::span<const std::uint8_t> mask() const noexcept { return mask_; }

    // Copies the mask of another image with the same extent.
    void copy_mask_from(const LinearImage& other) {
        if (other.height_ != height_ || other.width_ != width_)
            throw DimensionError("mask extent mismatch");
        mask_ = other.mask_;
    }

    // Combines an external validity mask (nonzero = valid) into this one.
    void apply_mask(std::span<const std::uint8_t> valid) {
        if (valid.size() != mask_.size())
            throw DimensionError("mask extent mismatch");
        for (std::size_t i = 0; i < mask_.size(); ++i)
            if (valid[i] == 0) mask_[i] = 0;
    }

    bool values_in_unit_range() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
    }

    friend bool operator==(const LinearImage&, const LinearImage&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
    std::vector<std::uint8_t> mask_;
};

// Direction of the scene light, stored with unit L2 norm. Only the
// direction is meaningful; e and 3e are the same illuminant.
class Illuminant {
public:
    Illuminant() = default;

    explicit Illuminant(const Rgb& rgb) {
        double norm2 = 0.0;
        for (double v : rgb) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw DegenerateEstimateError("illuminant components must be finite and nonnegative");
            norm2 += v * v;
        }
        if (!(norm2 > 0.0))
            throw DegenerateEstimateError("illuminant vector is zero");
        const double inv = 1.0 / std::sqrt(norm2);
        rgb_ = {rgb[0] * inv, rgb[1] * inv, rgb[2] * inv};
    }

    Illuminant(double r, double g, double b) : Illuminant(Rgb{r, g, b}) {}

    const Rgb& rgb() const noexcept { return rgb_; }
    double operator[](int c) const noexcept { return rgb_[c]; }

    // Same direction rescaled so the largest component is 1.
    Rgb max_normalized() const noexcept {
        const double m = std::max({rgb_[0], rgb_[1], rgb_[2]});
        return {rgb_[0] / m, rgb_[1] / m, rgb_[2] / m};
    }

    friend bool operator==(const Illuminant&, const Illuminant&) = default;

private:
    Rgb rgb_{1.0 / 1.7320508075688772, 1.0 / 1.7320508075688772, 1.0 / 1.7320508075688772};
};

struct PreprocessConfig {
    // Pixels with any channel strictly above this fraction of full scale are
    // masked out. 0.95 for Gehler-Shi, 0.97 for NUS 8-Camera.
    double saturation_fraction = 1.0;
    // Bit depth of the sensor data inside the container; 0 means "use the
    // container depth". 12-bit data in a 16-bit PNG normalizes by 4095.
    int source_bit_depth = 0;
    bool quantize_to_8bit = false;
    // Default order is clip, then quantize.
    bool quantize_before_clip = false;

    void validate() const {
        if (!(saturation_fraction > 0.0 && saturation_fraction <= 1.0))
            throw ParameterError("saturation_fraction must lie in (0,1]");
        if (source_bit_depth != 0 && (source_bit_depth < 8 || source_bit_depth > 16))
            throw ParameterError("source_bit_depth must be 0 or within [8,16]");
    }
};

inline LinearImage clip_saturated(const LinearImage& image, double saturation_fraction) {
    LinearImage out = image;
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
        const Rgb p = out.pixel(i);
        if (p[0] > saturation_fraction || p[1] > saturation_fraction || p[2] > saturation_fraction)
            out.set_valid(i, false);
    }
    return out;
}

inline LinearImage clip_saturated(const LinearImage& image, const PreprocessConfig& config) {
    config.validate();
    return clip_saturated(image, config.saturation_fraction);
}

inline double quantize_8bit(double v) noexcept { return std::round(v * 255.0) / 255.0; }

inline LinearImage quantize_8bit(const LinearImage& image) {
    LinearImage out = image;
    for (double& v : out.data())
        v = quantize_8bit(v);
    return out;
}

inline LinearImage preprocess(const LinearImage& image, const PreprocessConfig& config) {
    config.validate();
    if (!config.quantize_to_8bit)
        return clip_saturated(image, config.saturation_fraction);
    if (config.quantize_before_clip)
        return clip_saturated(quantize_8bit(image), config.saturation_fraction);
    return quantize_8bit(clip_saturated(image, config.saturation_fraction));
}

// Divides out the illuminant. The illuminant is rescaled to max 1 first so a
// correctly lit white maps to the same white.
inline LinearImage correct_image(const LinearImage& image, const Illuminant& illuminant) {
    const Rgb& e = illuminant.rgb();
    if (!(e[0] > 0.0 && e[1] > 0.0 && e[2] > 0.0))
        throw DegenerateIlluminantError("cannot correct with an illuminant that has a zero component");
    const Rgb scale = illuminant.max_normalized();
    LinearImage out = image;
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = std::clamp(data[i] / scale[i % 3], 0.0, 1.0);
    return out;
}

// Display-only transform; never feed the result back into an estimator.
inline LinearImage gamma_encode(const LinearImage& image, double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ParameterError("gamma must be positive");
    LinearImage out = image;
    const double inv = 1.0 / gamma;
    for (double& v : out.data())
        v = std::pow(std::max(v, 0.0), inv);
    return out;
}

} // namespace pbp
