#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pbp/error.hpp"
#include "pbp/image.hpp"

namespace pbp {

// Normalized 1-D Gaussian, radius ceil(3*sigma). Index radius is the center.
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0))
        throw ParameterError("gaussian kernel needs sigma > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k)
        v /= sum;
    return k;
}

// Separable Gaussian blur with edge replication. Masked pixels contribute
// their stored values; the mask is carried through unchanged.
inline LinearImage gaussian_smooth(const LinearImage& image, double sigma) {
    if (!(sigma >= 0.0))
        throw ParameterError("smoothing sigma must be >= 0");
    if (sigma == 0.0)
        return image;

    const auto kernel = gaussian_kernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const auto h = static_cast<std::ptrdiff_t>(image.height());
    const auto w = static_cast<std::ptrdiff_t>(image.width());
    auto clamp_idx = [](std::ptrdiff_t v, std::ptrdiff_t n) { return std::clamp<std::ptrdiff_t>(v, 0, n - 1); };

    LinearImage tmp = image;
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            Rgb acc{0.0, 0.0, 0.0};
            for (int k = -radius; k <= radius; ++k) {
                const double wgt = kernel[k + radius];
                const std::ptrdiff_t xx = clamp_idx(x + k, w);
                for (int c = 0; c < 3; ++c)
                    acc[c] += wgt * image.at(y, xx, c);
            }
            tmp.set_pixel(y, x, acc);
        }
    }
    LinearImage out = image;
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            Rgb acc{0.0, 0.0, 0.0};
            for (int k = -radius; k <= radius; ++k) {
                const double wgt = kernel[k + radius];
                const std::ptrdiff_t yy = clamp_idx(y + k, h);
                for (int c = 0; c < 3; ++c)
                    acc[c] += wgt * tmp.at(yy, x, c);
            }
            out.set_pixel(y, x, acc);
        }
    }
    return out;
}

namespace detail {

// First difference along one axis of a single-channel plane: central inside,
// one-sided forward/backward on the two borders.
inline double first_diff(const std::vector<double>& plane, std::size_t w, std::size_t n, std::size_t y,
                         std::size_t x, bool along_x) {
    auto v = [&](std::size_t yy, std::size_t xx) { return plane[yy * w + xx]; };
    const std::size_t pos = along_x ? x : y;
    auto at = [&](std::size_t p) { return along_x ? v(y, p) : v(p, x); };
    if (pos == 0)
        return at(1) - at(0);
    if (pos == n - 1)
        return at(n - 1) - at(n - 2);
    return 0.5 * (at(pos + 1) - at(pos - 1));
}

// Second difference: 3-point stencil, shifted inward on the borders.
inline double second_diff(const std::vector<double>& plane, std::size_t w, std::size_t n, std::size_t y,
                          std::size_t x, bool along_x) {
    auto at = [&](std::size_t p) { return along_x ? plane[y * w + p] : plane[p * w + x]; };
    std::size_t pos = along_x ? x : y;
    pos = std::clamp<std::size_t>(pos, 1, n - 2);
    return at(pos + 1) - 2.0 * at(pos) + at(pos - 1);
}

} // namespace detail

// Per-channel derivative magnitude. order 1: sqrt(dx^2 + dy^2); order 2:
// sqrt(dxx^2 + 2 dxy^2 + dyy^2). Output is nonnegative and not rescaled.
inline LinearImage spatial_derivative(const LinearImage& image, int order) {
    if (order != 1 && order != 2)
        throw ParameterError("derivative order must be 1 or 2");
    const std::size_t h = image.height();
    const std::size_t w = image.width();
    if (h < 3 || w < 3)
        throw DimensionError("derivative needs an image of at least 3x3");

    LinearImage out = image;
    std::vector<double> plane(h * w);
    std::vector<double> dx(h * w);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < h * w; ++i)
            plane[i] = image.data()[3 * i + c];
        if (order == 1) {
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t x = 0; x < w; ++x) {
                    const double gx = detail::first_diff(plane, w, w, y, x, true);
                    const double gy = detail::first_diff(plane, w, h, y, x, false);
                    out.at(y, x, c) = std::sqrt(gx * gx + gy * gy);
                }
            }
        } else {
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x)
                    dx[y * w + x] = detail::first_diff(plane, w, w, y, x, true);
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t x = 0; x < w; ++x) {
                    const double gxx = detail::second_diff(plane, w, w, y, x, true);
                    const double gyy = detail::second_diff(plane, w, h, y, x, false);
                    const double gxy = detail::first_diff(dx, w, h, y, x, false);
                    out.at(y, x, c) = std::sqrt(gxx * gxx + 2.0 * gxy * gxy + gyy * gyy);
                }
            }
        }
    }
    return out;
}

} // namespace pbp
