#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "pbp/brightness.hpp"
#include "pbp/error.hpp"
#include "pbp/image.hpp"

namespace pbp {

// Angle between two illuminant directions in degrees, in [0, 180].
inline double angular_error(const Rgb& est, const Rgb& gt) {
    const double ne = std::sqrt(est[0] * est[0] + est[1] * est[1] + est[2] * est[2]);
    const double ng = std::sqrt(gt[0] * gt[0] + gt[1] * gt[1] + gt[2] * gt[2]);
    if (!(ne > 0.0) || !(ng > 0.0))
        throw DegenerateEstimateError("angular error of a zero vector");
    const double dot = est[0] * gt[0] + est[1] * gt[1] + est[2] * gt[2];
    const double cosine = std::clamp(dot / (ne * ng), -1.0, 1.0);
    return std::acos(cosine) * 180.0 / std::numbers::pi;
}

inline double angular_error(const Illuminant& est, const Illuminant& gt) {
    return angular_error(est.rgb(), gt.rgb());
}

// Summary statistics of a list of angular errors, all in degrees.
struct ErrorStats {
    double mean = 0.0;
    double median = 0.0;
    double trimean = 0.0;
    double best25 = 0.0;
    double worst25 = 0.0;
    double geo_mean = 0.0;
    std::size_t count = 0;

    // Geometric mean of the five summary statistics, as the benchmark tables
    // report it.
    static double geometric_mean_of(double mean, double median, double trimean, double best25, double worst25) {
        return std::pow(mean * median * trimean * best25 * worst25, 0.2);
    }

    static ErrorStats from_summary(double mean, double median, double trimean, double best25, double worst25,
                                   std::size_t count = 0) {
        return {mean, median, trimean, best25, worst25,
                geometric_mean_of(mean, median, trimean, best25, worst25), count};
    }
};

namespace detail {

// Linear interpolation between order statistics at position q * (n - 1).
inline double interpolated_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace detail

inline ErrorStats error_stats(std::span<const double> errors) {
    if (errors.empty())
        throw ParameterError("error statistics need at least one value");
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    ErrorStats s;
    s.count = n;
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    s.trimean = 0.25 * (detail::interpolated_quantile(sorted, 0.25) + 2.0 * s.median +
                        detail::interpolated_quantile(sorted, 0.75));
    const std::size_t quarter = (n + 3) / 4;
    s.best25 = std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(quarter), 0.0) /
               static_cast<double>(quarter);
    s.worst25 = std::accumulate(sorted.end() - static_cast<std::ptrdiff_t>(quarter), sorted.end(), 0.0) /
                static_cast<double>(quarter);
    s.geo_mean = ErrorStats::geometric_mean_of(s.mean, s.median, s.trimean, s.best25, s.worst25);
    return s;
}

struct GroupError {
    std::size_t group = 0;
    double error_deg = 0.0;  // NaN when the group mean is the zero vector
};

// Sorts valid pixels by brightness (ties by row-major index), cuts them into
// `groups` contiguous near-equal runs, and scores each run's per-channel mean
// against the ground truth.
inline std::vector<GroupError> brightness_group_analysis(const LinearImage& image, const Illuminant& gt,
                                                         std::size_t groups = 100) {
    if (groups < 1)
        throw ParameterError("need at least one brightness group");
    std::vector<std::size_t> pixels;
    pixels.reserve(image.pixel_count());
    for (std::size_t i = 0; i < image.pixel_count(); ++i)
        if (image.valid(i))
            pixels.push_back(i);
    if (pixels.size() < groups)
        throw DimensionError("fewer valid pixels than brightness groups");

    const ScalarRaster brightness = brightness_map(image);
    std::stable_sort(pixels.begin(), pixels.end(),
                     [&](std::size_t a, std::size_t b) { return brightness[a] < brightness[b]; });

    std::vector<GroupError> out;
    out.reserve(groups);
    const std::size_t m = pixels.size();
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t begin = g * m / groups;
        const std::size_t end = (g + 1) * m / groups;
        Rgb sum{0.0, 0.0, 0.0};
        for (std::size_t k = begin; k < end; ++k) {
            const Rgb p = image.pixel(pixels[k]);
            for (int c = 0; c < 3; ++c)
                sum[c] += p[c];
        }
        const double count = static_cast<double>(end - begin);
        const Rgb mean{sum[0] / count, sum[1] / count, sum[2] / count};
        const bool zero = !(mean[0] > 0.0 || mean[1] > 0.0 || mean[2] > 0.0);
        out.push_back({g, zero ? std::numeric_limits<double>::quiet_NaN() : angular_error(mean, gt.rgb())});
    }
    return out;
}

} // namespace pbp
