#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pbp/error.hpp"
#include "pbp/image.hpp"

namespace pbp::harness {

// One row of a dataset manifest:
//   image_id,image_path,gt_r,gt_g,gt_b,mask_path,bit_depth,saturation_fraction,camera_tag
// mask_path, bit_depth, saturation_fraction and camera_tag may be empty.
// Relative paths resolve against the manifest's directory.
struct ManifestEntry {
    std::string image_id;
    std::filesystem::path image_path;
    Rgb gt_rgb{1.0, 1.0, 1.0};
    std::optional<std::filesystem::path> mask_path;
    int bit_depth = 0;  // 0 = container depth
    double saturation_fraction = 1.0;
    std::string camera_tag;
};

inline constexpr std::array<const char*, 9> kManifestColumns = {
    "image_id", "image_path", "gt_r", "gt_g", "gt_b", "mask_path", "bit_depth", "saturation_fraction", "camera_tag"};

namespace detail {

// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    if (quoted)
        throw FormatError("unterminated quote in CSV line");
    fields.push_back(cur);
    return fields;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"')
            out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

inline double parse_double(const std::string& s, const char* what, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw FormatError("manifest line " + std::to_string(line) + ": bad " + what + " '" + s + "'");
    }
}

} // namespace detail

inline std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {}) {
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("manifest is empty");
    const auto header = detail::split_csv_line(line);
    std::array<int, kManifestColumns.size()> col{};
    col.fill(-1);
    for (std::size_t i = 0; i < header.size(); ++i)
        for (std::size_t k = 0; k < kManifestColumns.size(); ++k)
            if (header[i] == kManifestColumns[k])
                col[k] = static_cast<int>(i);
    for (std::size_t k = 0; k < 5; ++k)
        if (col[k] < 0)
            throw FormatError(std::string("manifest header lacks column '") + kManifestColumns[k] + "'");

    std::vector<ManifestEntry> entries;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const auto f = detail::split_csv_line(line);
        auto field = [&](std::size_t k) -> std::string {
            return col[k] >= 0 && static_cast<std::size_t>(col[k]) < f.size() ? f[col[k]] : std::string{};
        };
        ManifestEntry e;
        e.image_id = field(0);
        const std::string path = field(1);
        if (e.image_id.empty() || path.empty())
            throw FormatError("manifest line " + std::to_string(lineno) + ": empty image_id or image_path");
        e.image_path = std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base_dir / path;
        for (int c = 0; c < 3; ++c)
            e.gt_rgb[c] = detail::parse_double(field(2 + c), "ground truth", lineno);
        if (!(e.gt_rgb[0] > 0.0 || e.gt_rgb[1] > 0.0 || e.gt_rgb[2] > 0.0) ||
            e.gt_rgb[0] < 0.0 || e.gt_rgb[1] < 0.0 || e.gt_rgb[2] < 0.0)
            throw FormatError("manifest line " + std::to_string(lineno) + ": ground truth must be nonnegative and nonzero");
        if (const std::string m = field(5); !m.empty())
            e.mask_path = std::filesystem::path(m).is_absolute() ? std::filesystem::path(m) : base_dir / m;
        if (const std::string b = field(6); !b.empty())
            e.bit_depth = static_cast<int>(detail::parse_double(b, "bit_depth", lineno));
        if (const std::string s = field(7); !s.empty())
            e.saturation_fraction = detail::parse_double(s, "saturation_fraction", lineno);
        e.camera_tag = field(8);
        entries.push_back(std::move(e));
    }
    return entries;
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open manifest '" + path.string() + "'");
    return parse_manifest(in, path.parent_path());
}

inline void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
    for (std::size_t k = 0; k < kManifestColumns.size(); ++k)
        out << (k ? "," : "") << kManifestColumns[k];
    out << '\n';
    out.precision(17);
    for (const auto& e : entries) {
        out << detail::csv_field(e.image_id) << ',' << detail::csv_field(e.image_path.string()) << ','
            << e.gt_rgb[0] << ',' << e.gt_rgb[1] << ',' << e.gt_rgb[2] << ','
            << detail::csv_field(e.mask_path ? e.mask_path->string() : std::string{}) << ','
            << (e.bit_depth ? std::to_string(e.bit_depth) : std::string{}) << ',' << e.saturation_fraction << ','
            << detail::csv_field(e.camera_tag) << '\n';
    }
}

} // namespace pbp::harness
