#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbp/eval.hpp"
#include "pbp/harness/dataset.hpp"
#include "pbp/harness/manifest.hpp"

namespace pbp::harness {

inline nlohmann::json stats_json(const ErrorStats& s) {
    return {{"mean", s.mean},       {"median", s.median},   {"trimean", s.trimean}, {"best25", s.best25},
            {"worst25", s.worst25}, {"geo_mean", s.geo_mean}, {"count", s.count}};
}

inline const char* kStatsCsvHeader = "method,mean,median,trimean,best25,worst25,geo_mean,count";

inline void write_stats_csv_row(std::ostream& out, const std::string& method, const ErrorStats& s) {
    out << detail::csv_field(method) << ',' << s.mean << ',' << s.median << ',' << s.trimean << ',' << s.best25 << ','
        << s.worst25 << ',' << s.geo_mean << ',' << s.count << '\n';
}

// Per-image dump: image_id,error_deg,elapsed_ms. Failed images are written
// with empty error and the failure kind in a trailing column.
inline void write_errors_csv(std::ostream& out, const DatasetResult& r) {
    out << "image_id,error_deg,elapsed_ms,failure\n";
    out.precision(17);
    for (const auto& im : r.images) {
        out << detail::csv_field(im.image_id) << ',';
        if (im.ok)
            out << im.error_deg;
        out << ',' << im.elapsed_ms << ',' << detail::csv_field(im.failure_kind) << '\n';
    }
}

// Reads the error column back from a per-image CSV (successful rows only).
inline std::vector<double> read_errors_csv(std::istream& in) {
    std::string line;
    std::getline(in, line);
    std::vector<double> errs;
    while (std::getline(in, line)) {
        const auto f = detail::split_csv_line(line);
        if (f.size() >= 2 && !f[1].empty())
            errs.push_back(std::stod(f[1]));
    }
    return errs;
}

inline nlohmann::json dataset_json(const DatasetResult& r, bool per_camera) {
    nlohmann::json j;
    j["method"] = r.method.describe();
    j["timing_boundary"] = kTimingBoundary;
    j["images"] = r.images.size();
    j["failures"] = r.failures;
    j["masks_used"] = r.masks_used;
    j["mean_time_ms"] = r.mean_time_ms;
    j["pooling"] = per_camera ? "per-camera-average" : "pooled";
    if (per_camera) {
        if (auto avg = camera_averaged_stats(r))
            j["stats"] = stats_json(*avg);
        nlohmann::json cams = nlohmann::json::object();
        for (const auto& [tag, s] : per_camera_stats(r))
            cams[tag.empty() ? "(untagged)" : tag] = stats_json(s);
        j["per_camera"] = cams;
    } else if (r.stats) {
        j["stats"] = stats_json(*r.stats);
    }
    if (!j.contains("stats"))
        j["stats"] = nullptr;
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& im : r.images)
        if (!im.ok)
            fails.push_back({{"image_id", im.image_id}, {"kind", im.failure_kind}, {"message", im.failure_message}});
    j["failed"] = fails;
    return j;
}

inline void write_grid_csv(std::ostream& out, const GridResult& g) {
    out << "sample_fraction,interval,minkowski_p,n,q,mean,median,trimean,best25,worst25,geo_mean,objective,failures,"
           "mean_time_ms,best\n";
    for (std::size_t i = 0; i < g.rows.size(); ++i) {
        const auto& row = g.rows[i];
        const auto& m = row.method;
        out << m.sample_fraction << ',' << m.interval << ',' << m.base.minkowski_p.to_string() << ',' << m.grid_factor
            << ',' << m.brightness_power << ',';
        if (row.stats)
            out << row.stats->mean << ',' << row.stats->median << ',' << row.stats->trimean << ',' << row.stats->best25
                << ',' << row.stats->worst25 << ',' << row.stats->geo_mean << ',';
        else
            out << ",,,,,,";
        out << row.objective << ',' << row.failures << ',' << row.mean_time_ms << ',' << (i == g.best ? 1 : 0) << '\n';
    }
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "method,interval,mean,median,time_ms,norm_mean,norm_median,norm_time,failures\n";
    for (const auto& r : rows)
        out << detail::csv_field(r.method) << ',' << r.interval << ',' << r.mean << ',' << r.median << ',' << r.time_ms
            << ',' << r.norm_mean << ',' << r.norm_median << ',' << r.norm_time << ',' << r.failures << '\n';
}

} // namespace pbp::harness
