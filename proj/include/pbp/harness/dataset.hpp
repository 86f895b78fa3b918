#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "pbp/error.hpp"
#include "pbp/eval.hpp"
#include "pbp/harness/manifest.hpp"
#include "pbp/harness/method.hpp"
#include "pbp/image.hpp"
#include "pbp/image_io.hpp"

namespace pbp::harness {

// Wall time is measured around the estimator call only; decoding and
// preprocessing are outside the timed region.
inline constexpr const char* kTimingBoundary = "estimation only (excludes decode and preprocessing)";

struct RunOptions {
    bool quantize_8bit = false;
    bool quantize_before_clip = false;
    std::size_t jobs = 1;
};

// Worker count from CC_JOBS, or 1.
inline std::size_t default_jobs() {
    if (const char* env = std::getenv("CC_JOBS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0)
            return static_cast<std::size_t>(v);
    }
    return 1;
}

struct ImageOutcome {
    std::string image_id;
    std::string camera_tag;
    bool ok = false;
    double error_deg = std::numeric_limits<double>::quiet_NaN();
    double elapsed_ms = 0.0;
    bool mask_used = false;
    std::string failure_kind;
    std::string failure_message;
};

struct DatasetResult {
    MethodConfig method;
    std::vector<ImageOutcome> images;  // manifest order
    std::optional<ErrorStats> stats;   // over successful images; empty if none
    std::size_t failures = 0;
    std::size_t masks_used = 0;
    double mean_time_ms = 0.0;         // over successful images

    std::vector<double> errors() const {
        std::vector<double> out;
        for (const auto& im : images)
            if (im.ok)
                out.push_back(im.error_deg);
        return out;
    }
};

// Load, apply the optional mask file, then clip / quantize per entry.
inline LinearImage prepare_entry(const ManifestEntry& entry, const RunOptions& options) {
    PreprocessConfig pre;
    pre.saturation_fraction = entry.saturation_fraction;
    pre.source_bit_depth = entry.bit_depth;
    pre.quantize_to_8bit = options.quantize_8bit;
    pre.quantize_before_clip = options.quantize_before_clip;
    LinearImage image = load_image(entry.image_path, pre);
    if (entry.mask_path)
        image.apply_mask(load_mask(*entry.mask_path, image.height(), image.width()));
    return preprocess(image, pre);
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
                fn(i);
        });
    }
    for (auto& t : workers)
        t.join();
}

inline void record_failure(ImageOutcome& out, const char* kind, const char* what) {
    out.ok = false;
    out.failure_kind = kind;
    out.failure_message = what;
}

inline void finalize(DatasetResult& r) {
    r.failures = 0;
    r.masks_used = 0;
    double total_ms = 0.0;
    for (const auto& im : r.images) {
        r.failures += !im.ok;
        r.masks_used += im.mask_used;
        if (im.ok)
            total_ms += im.elapsed_ms;
    }
    const auto errs = r.errors();
    if (!errs.empty()) {
        r.stats = error_stats(errs);
        r.mean_time_ms = total_ms / static_cast<double>(errs.size());
    }
}

} // namespace detail

// Evaluates several method configurations over one manifest. Each image is
// decoded once and run through every configuration. Per-image failures are
// recorded and excluded from the statistics.
inline std::vector<DatasetResult> evaluate_methods(const std::vector<ManifestEntry>& manifest,
                                                   const std::vector<MethodConfig>& methods,
                                                   const RunOptions& options = {}) {
    if (manifest.empty())
        throw ParameterError("manifest has no entries");
    if (methods.empty())
        throw ParameterError("no methods to evaluate");
    for (const auto& m : methods)
        m.validate();

    std::vector<DatasetResult> results(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
        results[m].method = methods[m];
        results[m].images.resize(manifest.size());
    }

    detail::parallel_for(manifest.size(), options.jobs, [&](std::size_t i) {
        const ManifestEntry& entry = manifest[i];
        for (auto& r : results) {
            r.images[i].image_id = entry.image_id;
            r.images[i].camera_tag = entry.camera_tag;
            r.images[i].mask_used = entry.mask_path.has_value();
        }
        std::optional<LinearImage> image;
        try {
            image = prepare_entry(entry, options);
        } catch (const Error& e) {
            for (auto& r : results)
                detail::record_failure(r.images[i], e.kind(), e.what());
            return;
        } catch (const std::exception& e) {
            for (auto& r : results)
                detail::record_failure(r.images[i], "unexpected", e.what());
            return;
        }
        const Illuminant gt(entry.gt_rgb);
        for (std::size_t m = 0; m < methods.size(); ++m) {
            ImageOutcome& out = results[m].images[i];
            try {
                const auto t0 = std::chrono::steady_clock::now();
                const Illuminant est = run_method(*image, methods[m]);
                const auto t1 = std::chrono::steady_clock::now();
                out.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
                out.error_deg = angular_error(est, gt);
                out.ok = true;
            } catch (const Error& e) {
                detail::record_failure(out, e.kind(), e.what());
            } catch (const std::exception& e) {
                detail::record_failure(out, "unexpected", e.what());
            }
        }
    });

    for (auto& r : results)
        detail::finalize(r);
    return results;
}

inline DatasetResult run_dataset(const std::vector<ManifestEntry>& manifest, const MethodConfig& method,
                                 const RunOptions& options = {}) {
    return std::move(evaluate_methods(manifest, {method}, options).front());
}

// Statistics per camera tag (untagged images share the "" key).
inline std::map<std::string, ErrorStats> per_camera_stats(const DatasetResult& r) {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& im : r.images)
        if (im.ok)
            groups[im.camera_tag].push_back(im.error_deg);
    std::map<std::string, ErrorStats> out;
    for (const auto& [tag, errs] : groups)
        out.emplace(tag, error_stats(errs));
    return out;
}

// Component-wise average of the per-camera statistics; the geometric mean
// is recomputed from the averaged five.
inline std::optional<ErrorStats> camera_averaged_stats(const DatasetResult& r) {
    const auto per = per_camera_stats(r);
    if (per.empty())
        return std::nullopt;
    ErrorStats avg;
    for (const auto& [tag, s] : per) {
        avg.mean += s.mean;
        avg.median += s.median;
        avg.trimean += s.trimean;
        avg.best25 += s.best25;
        avg.worst25 += s.worst25;
        avg.count += s.count;
    }
    const double k = static_cast<double>(per.size());
    return ErrorStats::from_summary(avg.mean / k, avg.median / k, avg.trimean / k, avg.best25 / k, avg.worst25 / k,
                                    avg.count);
}

struct GridSpec {
    std::vector<double> sample_fractions;
    std::vector<std::size_t> intervals;
    std::vector<MinkowskiOrder> minkowski_ps;
    // Empty: keep the base method's n / q.
    std::vector<std::size_t> grid_factors;
    std::vector<int> brightness_powers;
};

struct GridRow {
    MethodConfig method;
    std::optional<ErrorStats> stats;
    std::size_t failures = 0;
    double mean_time_ms = 0.0;
    double objective = std::numeric_limits<double>::infinity();  // mean + median

    auto key() const {
        return std::make_tuple(method.sample_fraction, method.interval, method.base.minkowski_p, method.grid_factor,
                               method.brightness_power);
    }
};

struct GridResult {
    std::vector<GridRow> rows;  // enumeration order: fraction, interval, p, n, q
    std::size_t best = 0;

    const GridRow& best_row() const { return rows.at(best); }
};

inline std::vector<MethodConfig> expand_grid(const MethodConfig& base, const GridSpec& grid) {
    if (grid.sample_fractions.empty() || grid.intervals.empty() || grid.minkowski_ps.empty())
        throw ParameterError("grid candidate sets must be nonempty");
    const std::vector<std::size_t> ns = grid.grid_factors.empty() ? std::vector<std::size_t>{base.grid_factor}
                                                                  : grid.grid_factors;
    const std::vector<int> qs = grid.brightness_powers.empty() ? std::vector<int>{base.brightness_power}
                                                               : grid.brightness_powers;
    std::vector<MethodConfig> out;
    for (double f : grid.sample_fractions)
        for (std::size_t s : grid.intervals)
            for (const MinkowskiOrder& p : grid.minkowski_ps)
                for (std::size_t n : ns)
                    for (int q : qs) {
                        MethodConfig m = base;
                        m.sample_fraction = f;
                        m.interval = s;
                        m.base.minkowski_p = p;
                        m.grid_factor = n;
                        m.brightness_power = q;
                        m.validate();
                        out.push_back(m);
                    }
    return out;
}

// Exhaustive search minimizing mean + median angular error. Ties go to the
// smaller mean, then to the lexicographically smaller (fraction, S, p, n, q).
inline GridResult grid_search(const std::vector<ManifestEntry>& manifest, const MethodConfig& base,
                              const GridSpec& grid, const RunOptions& options = {}) {
    const auto configs = expand_grid(base, grid);
    const auto results = evaluate_methods(manifest, configs, options);
    GridResult out;
    for (const auto& r : results) {
        GridRow row;
        row.method = r.method;
        row.stats = r.stats;
        row.failures = r.failures;
        row.mean_time_ms = r.mean_time_ms;
        if (r.stats)
            row.objective = r.stats->mean + r.stats->median;
        out.rows.push_back(std::move(row));
    }
    auto better = [](const GridRow& a, const GridRow& b) {
        if (a.objective != b.objective)
            return a.objective < b.objective;
        const double am = a.stats ? a.stats->mean : std::numeric_limits<double>::infinity();
        const double bm = b.stats ? b.stats->mean : std::numeric_limits<double>::infinity();
        if (am != bm)
            return am < bm;
        return a.key() < b.key();
    };
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (better(out.rows[i], out.rows[out.best]))
            out.best = i;
    return out;
}

struct SweepRow {
    std::string method;
    std::size_t interval = 1;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double median = std::numeric_limits<double>::quiet_NaN();
    double time_ms = 0.0;
    // Each column divided by its maximum over the intervals of one method.
    double norm_mean = std::numeric_limits<double>::quiet_NaN();
    double norm_median = std::numeric_limits<double>::quiet_NaN();
    double norm_time = std::numeric_limits<double>::quiet_NaN();
    std::size_t failures = 0;
};

// Runs every method at every downsampling interval (replacing the method's
// own interval) and reports raw and max-normalized mean, median and time.
inline std::vector<SweepRow> downsample_sweep(const std::vector<ManifestEntry>& manifest,
                                              const std::vector<MethodConfig>& methods,
                                              const std::vector<std::size_t>& intervals,
                                              const RunOptions& options = {}) {
    if (intervals.empty())
        throw ParameterError("no downsampling intervals given");
    for (std::size_t s : intervals)
        if (s < 1)
            throw ParameterError("downsampling interval must be >= 1");
    std::vector<MethodConfig> configs;
    for (const auto& m : methods)
        for (std::size_t s : intervals) {
            MethodConfig c = m;
            c.interval = s;
            configs.push_back(c);
        }
    const auto results = evaluate_methods(manifest, configs, options);

    std::vector<SweepRow> rows;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const std::size_t first = rows.size();
        double max_mean = 0.0, max_median = 0.0, max_time = 0.0;
        for (std::size_t si = 0; si < intervals.size(); ++si) {
            const auto& r = results[mi * intervals.size() + si];
            SweepRow row;
            row.method = methods[mi].label();
            row.interval = intervals[si];
            row.failures = r.failures;
            row.time_ms = r.mean_time_ms;
            if (r.stats) {
                row.mean = r.stats->mean;
                row.median = r.stats->median;
                max_mean = std::max(max_mean, row.mean);
                max_median = std::max(max_median, row.median);
            }
            max_time = std::max(max_time, row.time_ms);
            rows.push_back(row);
        }
        for (std::size_t k = first; k < rows.size(); ++k) {
            if (max_mean > 0.0)
                rows[k].norm_mean = rows[k].mean / max_mean;
            if (max_median > 0.0)
                rows[k].norm_median = rows[k].median / max_median;
            if (max_time > 0.0)
                rows[k].norm_time = rows[k].time_ms / max_time;
        }
    }
    return rows;
}

struct BenchStats {
    double min_ms = 0.0;
    double mean_ms = 0.0;
    double p95_ms = 0.0;
    std::size_t repeats = 0;
};

// One untimed warm-up call, then `repeats` timed estimator calls on an
// already preprocessed image. p95 uses the nearest-rank definition.
inline BenchStats bench_single(const LinearImage& image, const MethodConfig& method, std::size_t repeats) {
    if (repeats < 1)
        throw ParameterError("repeats must be >= 1");
    method.validate();
    volatile double sink = run_method(image, method)[0];
    std::vector<double> samples;
    samples.reserve(repeats);
    for (std::size_t i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Illuminant e = run_method(image, method);
        const auto t1 = std::chrono::steady_clock::now();
        sink = sink + e[0];
        samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    (void)sink;
    std::sort(samples.begin(), samples.end());
    BenchStats s;
    s.repeats = repeats;
    s.min_ms = samples.front();
    s.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(repeats);
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(repeats)));
    s.p95_ms = samples[std::max<std::size_t>(rank, 1) - 1];
    return s;
}

} // namespace pbp::harness
