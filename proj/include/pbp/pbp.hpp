#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "pbp/brightness.hpp"
#include "pbp/downsample.hpp"
#include "pbp/error.hpp"
#include "pbp/estimators.hpp"
#include "pbp/image.hpp"

namespace pbp {

// Patch-wise Bright Pixels configuration.
//
// The grid is 2n rows x 3n columns for landscape input (3n x 2n for
// portrait). Each patch receives a share of the ceil(N * sample_fraction)
// pixel budget proportional to the sum of its brightness^q, where N counts
// the pixels of the downsampled raster.
struct PbpParams {
    std::size_t grid_factor = 1;        // n
    int brightness_power = 1;           // q
    double sample_fraction = 0.02;      // sigma, in (0,1)
    std::size_t downsample_interval = 11;  // S
    GrayFrameworkParams base{};

    void validate() const {
        if (grid_factor < 1)
            throw ParameterError("grid factor n must be >= 1");
        if (brightness_power < 1)
            throw ParameterError("brightness power q must be >= 1");
        if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
            throw ParameterError("sample fraction must lie in (0,1)");
        if (downsample_interval < 1)
            throw ParameterError("downsampling interval must be >= 1");
        base.validate();
    }
};

// Tuned (sigma, S, p) per base method for (n, q) = (1,1) and (2,1); smoothing
// and derivative settings come from the baseline preset of the same method.
inline PbpParams pbp_preset(GrayMethod base, std::size_t n = 1) {
    struct Row { double sigma; std::size_t s; double p; };
    Row row{};
    const bool fine = n == 2;
    if (n != 1 && n != 2)
        throw ParameterError("tuned PBP presets exist for n = 1 and n = 2 only");
    switch (base) {
    case GrayMethod::gw: row = fine ? Row{0.02, 9, 1} : Row{0.02, 11, 1}; break;
    case GrayMethod::sog: row = fine ? Row{0.005, 3, 1} : Row{0.005, 4, 1}; break;
    case GrayMethod::ggw: row = Row{0.02, 3, 3}; break;
    case GrayMethod::ge1: row = Row{0.04, 3, 1}; break;
    case GrayMethod::ge2: row = Row{0.04, 6, 1}; break;
    case GrayMethod::wp: throw ParameterError("no tuned PBP preset for a WP base");
    }
    PbpParams params;
    params.grid_factor = n;
    params.brightness_power = 1;
    params.sample_fraction = row.sigma;
    params.downsample_interval = row.s;
    params.base = gray_preset(base);
    params.base.minkowski_p = MinkowskiOrder(row.p);
    return params;
}

struct Patch {
    std::size_t row_begin = 0, row_end = 0;
    std::size_t col_begin = 0, col_end = 0;

    std::size_t rows() const noexcept { return row_end - row_begin; }
    std::size_t cols() const noexcept { return col_end - col_begin; }
    std::size_t area() const noexcept { return rows() * cols(); }

    friend bool operator==(const Patch&, const Patch&) = default;
};

// Near-equal rectangular tiling, patches in row-major grid order.
struct PatchGrid {
    std::size_t height = 0, width = 0;
    std::size_t rows = 0, cols = 0;
    std::vector<Patch> patches;

    std::size_t size() const noexcept { return patches.size(); }
};

struct GridShape {
    std::size_t rows = 1;
    std::size_t cols = 1;
};

// Row boundaries at floor(r*H/rows), column boundaries at floor(c*W/cols).
inline PatchGrid build_uniform_grid(std::size_t height, std::size_t width, GridShape shape) {
    if (shape.rows < 1 || shape.cols < 1)
        throw ParameterError("grid needs at least one row and one column");
    if (height < shape.rows || width < shape.cols)
        throw DimensionError("image too small for a " + std::to_string(shape.rows) + "x" +
                             std::to_string(shape.cols) + " patch grid");
    PatchGrid grid{height, width, shape.rows, shape.cols, {}};
    grid.patches.reserve(shape.rows * shape.cols);
    for (std::size_t r = 0; r < shape.rows; ++r) {
        for (std::size_t c = 0; c < shape.cols; ++c) {
            grid.patches.push_back({r * height / shape.rows, (r + 1) * height / shape.rows, c * width / shape.cols,
                                    (c + 1) * width / shape.cols});
        }
    }
    return grid;
}

inline GridShape grid_shape_for(std::size_t height, std::size_t width, std::size_t n) {
    if (n < 1)
        throw ParameterError("grid factor n must be >= 1");
    return width >= height ? GridShape{2 * n, 3 * n} : GridShape{3 * n, 2 * n};
}

inline PatchGrid build_patch_grid(std::size_t height, std::size_t width, std::size_t n) {
    return build_uniform_grid(height, width, grid_shape_for(height, width, n));
}

struct PatchAllocation {
    std::vector<double> patch_brightness;  // L_i
    std::vector<std::size_t> capacity;      // valid pixels per patch
    std::vector<std::size_t> counts;        // N_i
    double total_brightness = 0.0;          // L
    std::size_t budget = 0;                 // N_sigma

    std::size_t allocated() const noexcept { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

namespace detail {

inline double int_pow(double base, int exp) noexcept {
    double result = 1.0;
    while (exp > 0) {
        if (exp & 1)
            result *= base;
        base *= base;
        exp >>= 1;
    }
    return result;
}

} // namespace detail

// Splits budget across patches in proportion to weights (largest remainder,
// ties to the lower patch index), then caps each patch at its capacity and
// hands the surplus out again in the same remainder order.
inline std::vector<std::size_t> apportion(std::span<const double> weights, std::span<const std::size_t> capacity,
                                          std::size_t budget) {
    const std::size_t k = weights.size();
    if (capacity.size() != k)
        throw DimensionError("weights and capacities differ in length");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0))
        throw DegenerateBrightnessError("total modified brightness is zero");

    std::vector<std::size_t> counts(k, 0);
    std::vector<double> remainder(k, 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double share = weights[i] / total * static_cast<double>(budget);
        const double whole = std::floor(share);
        counts[i] = static_cast<std::size_t>(whole);
        remainder[i] = share - whole;
        assigned += counts[i];
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });

    for (std::size_t j = 0; assigned < budget; j = (j + 1) % k) {
        ++counts[order[j]];
        ++assigned;
    }

    std::size_t surplus = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (counts[i] > capacity[i]) {
            surplus += counts[i] - capacity[i];
            counts[i] = capacity[i];
        }
    }
    while (surplus > 0) {
        bool progressed = false;
        for (std::size_t j = 0; j < k && surplus > 0; ++j) {
            const std::size_t i = order[j];
            if (counts[i] < capacity[i]) {
                ++counts[i];
                --surplus;
                progressed = true;
            }
        }
        if (!progressed)
            break;  // every patch is full: fewer valid pixels than budget
    }
    return counts;
}

inline PatchAllocation allocate_counts(const ScalarRaster& brightness, std::span<const std::uint8_t> valid,
                                       const PatchGrid& grid, int q, double sample_fraction) {
    if (q < 1)
        throw ParameterError("brightness power q must be >= 1");
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
        throw ParameterError("sample fraction must lie in (0,1)");
    if (brightness.height != grid.height || brightness.width != grid.width || valid.size() != brightness.size())
        throw DimensionError("brightness raster does not match the patch grid");

    PatchAllocation alloc;
    alloc.budget = sample_budget(brightness.size(), sample_fraction);
    alloc.patch_brightness.assign(grid.size(), 0.0);
    alloc.capacity.assign(grid.size(), 0);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Patch& patch = grid.patches[p];
        double sum = 0.0;
        std::size_t cap = 0;
        for (std::size_t r = patch.row_begin; r < patch.row_end; ++r) {
            const std::size_t base = r * brightness.width;
            for (std::size_t c = patch.col_begin; c < patch.col_end; ++c) {
                sum += detail::int_pow(brightness.values[base + c], q);
                cap += valid[base + c] != 0;
            }
        }
        alloc.patch_brightness[p] = sum;
        alloc.capacity[p] = cap;
    }
    alloc.total_brightness = std::accumulate(alloc.patch_brightness.begin(), alloc.patch_brightness.end(), 0.0);
    if (!(alloc.total_brightness > 0.0))
        throw DegenerateBrightnessError("image has zero modified brightness (all black or all masked)");
    alloc.counts = apportion(alloc.patch_brightness, alloc.capacity, alloc.budget);
    return alloc;
}

// The counts[i] brightest valid pixels of every patch, ties to the lower
// row-major index. Returned as one sorted selection.
inline PixelSelection select_patchwise(const ScalarRaster& brightness, std::span<const std::uint8_t> valid,
                                       const PatchAllocation& alloc, const PatchGrid& grid) {
    if (alloc.counts.size() != grid.size())
        throw DimensionError("allocation does not match the patch grid");
    PixelSelection sel{brightness.height, brightness.width, {}};
    sel.indices.reserve(alloc.allocated());
    std::vector<std::size_t> candidates;
    auto brighter = [&](std::size_t a, std::size_t b) {
        return brightness.values[a] > brightness.values[b] || (brightness.values[a] == brightness.values[b] && a < b);
    };
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const std::size_t want = alloc.counts[p];
        if (want == 0)
            continue;
        const Patch& patch = grid.patches[p];
        candidates.clear();
        for (std::size_t r = patch.row_begin; r < patch.row_end; ++r)
            for (std::size_t c = patch.col_begin; c < patch.col_end; ++c)
                if (valid[r * brightness.width + c])
                    candidates.push_back(r * brightness.width + c);
        const std::size_t take = std::min(want, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                          candidates.end(), brighter);
        sel.indices.insert(sel.indices.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(sel.indices.begin(), sel.indices.end());
    return sel;
}

// Intermediate products of one PBP run, kept for inspection and tests.
struct PbpTrace {
    LinearImage filtered;  // downsampled, then smoothed / differentiated
    ScalarRaster brightness;
    PatchGrid grid;
    PatchAllocation allocation;
    PixelSelection selection;
    Illuminant estimate;
};

inline PbpTrace pbp_run(const LinearImage& image, const PbpParams& params, std::optional<GridShape> shape = {}) {
    params.validate();
    PbpTrace t;
    t.filtered = apply_gray_filters(equidistant_downsample(image, params.downsample_interval), params.base);
    t.brightness = brightness_map(t.filtered);
    t.grid = build_uniform_grid(t.filtered.height(), t.filtered.width(),
                                shape ? *shape : grid_shape_for(t.filtered.height(), t.filtered.width(), params.grid_factor));
    t.allocation = allocate_counts(t.brightness, t.filtered.mask(), t.grid, params.brightness_power, params.sample_fraction);
    t.selection = select_patchwise(t.brightness, t.filtered.mask(), t.allocation, t.grid);
    t.estimate = minkowski_estimate(t.filtered, t.selection, params.base.minkowski_p);
    return t;
}

inline Illuminant pbp_estimate(const LinearImage& image, const PbpParams& params) {
    return pbp_run(image, params).estimate;
}

} // namespace pbp
