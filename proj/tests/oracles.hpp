#pragma once

// Deliberately naive reference implementations used only by the tests.
// They share no code with the library beyond the image container.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "pbp/image.hpp"

namespace pbp::oracle {

// Per-channel (mean of v^p)^(1/p), p = +inf for max, then unit length.
// Uses std::pow for every finite p, including 1 and 2.
inline std::array<double, 3> minkowski(const LinearImage& img, double p) {
    std::array<double, 3> out{0, 0, 0};
    std::size_t n = 0;
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 0; c < img.width(); ++c) {
            if (!img.valid(r, c))
                continue;
            ++n;
            for (int ch = 0; ch < 3; ++ch) {
                const double v = img.at(r, c, ch);
                if (std::isinf(p))
                    out[ch] = std::max(out[ch], v);
                else
                    out[ch] += std::pow(v, p);
            }
        }
    }
    if (!std::isinf(p))
        for (double& v : out)
            v = std::pow(v / static_cast<double>(n), 1.0 / p);
    const double norm = std::sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2]);
    for (double& v : out)
        v /= norm;
    return out;
}

// Largest-remainder apportionment by repeated argmax scans, then capacity
// capping with surplus handed out in the same remainder order.
inline std::vector<std::size_t> largest_remainder(const std::vector<double>& weights,
                                                  const std::vector<std::size_t>& capacity, std::size_t budget) {
    const std::size_t k = weights.size();
    double total = 0.0;
    for (double w : weights)
        total += w;
    std::vector<std::size_t> counts(k);
    std::vector<double> rem(k);
    std::size_t sum = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double share = weights[i] / total * static_cast<double>(budget);
        counts[i] = static_cast<std::size_t>(std::floor(share));
        rem[i] = share - std::floor(share);
        sum += counts[i];
    }
    // Remainder ranking: argmax with lowest index on ties, repeated.
    std::vector<std::size_t> order;
    std::vector<bool> used(k, false);
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = k;
        for (std::size_t i = 0; i < k; ++i)
            if (!used[i] && (best == k || rem[i] > rem[best]))
                best = i;
        used[best] = true;
        order.push_back(best);
    }
    for (std::size_t j = 0; sum < budget; ++j) {
        ++counts[order[j % k]];
        ++sum;
    }
    std::size_t surplus = 0;
    for (std::size_t i = 0; i < k; ++i)
        if (counts[i] > capacity[i]) {
            surplus += counts[i] - capacity[i];
            counts[i] = capacity[i];
        }
    std::size_t idle_rounds = 0;
    for (std::size_t j = 0; surplus > 0 && idle_rounds < k; ++j) {
        const std::size_t i = order[j % k];
        if (counts[i] < capacity[i]) {
            ++counts[i];
            --surplus;
            idle_rounds = 0;
        } else {
            ++idle_rounds;
        }
    }
    return counts;
}

// Picks `count` brightest valid indices among `candidates` by repeated
// linear max-scans (ties to the lower index).
inline std::vector<std::size_t> brightest(const std::vector<double>& brightness, const std::vector<std::size_t>& candidates,
                                          std::size_t count) {
    std::vector<bool> taken(candidates.size(), false);
    std::vector<std::size_t> out;
    for (std::size_t step = 0; step < count && step < candidates.size(); ++step) {
        std::size_t best = candidates.size();
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            if (taken[j])
                continue;
            if (best == candidates.size() || brightness[candidates[j]] > brightness[candidates[best]] ||
                (brightness[candidates[j]] == brightness[candidates[best]] && candidates[j] < candidates[best]))
                best = j;
        }
        taken[best] = true;
        out.push_back(candidates[best]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// 2-D Gaussian weight at (dy, dx) of the truncated, normalized kernel.
inline double gaussian_2d_weight(double sigma, int dy, int dx) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    double total = 0.0;
    for (int y = -radius; y <= radius; ++y)
        for (int x = -radius; x <= radius; ++x)
            total += std::exp(-0.5 * (x * x + y * y) / (sigma * sigma));
    return std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma)) / total;
}

inline LinearImage random_image(std::mt19937_64& rng, std::size_t h, std::size_t w, double mask_prob = 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    LinearImage img(h, w);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.set_pixel(i, {u(rng), u(rng), u(rng)});
        if (mask_prob > 0.0 && u(rng) < mask_prob)
            img.set_valid(i, false);
    }
    return img;
}

} // namespace pbp::oracle
