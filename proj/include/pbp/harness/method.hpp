#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>

#include "pbp/downsample.hpp"
#include "pbp/error.hpp"
#include "pbp/estimators.hpp"
#include "pbp/image.hpp"
#include "pbp/pbp.hpp"

namespace pbp::harness {

enum class MethodKind { gray, bright_pixels, pbp };

// Everything needed to turn a preprocessed image into an estimate. For the
// gray family and BP, `interval` is an equidistant downsampling applied
// before the estimator; for PBP it is the PBP interval S.
struct MethodConfig {
    MethodKind kind = MethodKind::gray;
    GrayMethod base_method = GrayMethod::gw;
    GrayFrameworkParams base = gray_preset(GrayMethod::gw);
    double sample_fraction = 0.02;
    std::size_t interval = 1;
    std::size_t grid_factor = 1;
    int brightness_power = 1;

    PbpParams pbp_params() const {
        PbpParams p;
        p.grid_factor = grid_factor;
        p.brightness_power = brightness_power;
        p.sample_fraction = sample_fraction;
        p.downsample_interval = interval;
        p.base = base;
        return p;
    }

    // Short human-readable name, e.g. "PBP-(1,1)+gw" or "sog".
    std::string label() const {
        std::ostringstream os;
        switch (kind) {
        case MethodKind::gray: os << gray_method_name(base_method); break;
        case MethodKind::bright_pixels: os << "BP+" << gray_method_name(base_method); break;
        case MethodKind::pbp:
            os << "PBP-(" << grid_factor << "," << brightness_power << ")+" << gray_method_name(base_method);
            break;
        }
        return os.str();
    }

    // Full parameter description for report headers.
    std::string describe() const {
        std::ostringstream os;
        os << label() << " k=" << base.derivative_order << " p=" << base.minkowski_p.to_string()
           << " smooth=" << base.smoothing_sigma << " S=" << interval;
        if (kind != MethodKind::gray)
            os << " frac=" << sample_fraction;
        if (kind == MethodKind::pbp)
            os << " n=" << grid_factor << " q=" << brightness_power;
        return os.str();
    }

    void validate() const {
        base.validate();
        if (interval < 1)
            throw ParameterError("downsampling interval must be >= 1");
        if (kind == MethodKind::bright_pixels && !(sample_fraction > 0.0 && sample_fraction <= 1.0))
            throw ParameterError("sample fraction must lie in (0,1]");
        if (kind == MethodKind::pbp)
            pbp_params().validate();
    }
};

// Builds a method from its CLI name: gw, wp, sog, ggw, ge1, ge2, bp or pbp.
// bp and pbp take `base` as their gray-family base method; PBP starts from the
// tuned preset for that base and grid factor n.
inline MethodConfig make_method(std::string_view name, std::string_view base = "gw", std::size_t n = 1) {
    MethodConfig cfg;
    if (auto gm = parse_gray_method(name)) {
        cfg.kind = MethodKind::gray;
        cfg.base_method = *gm;
        cfg.base = gray_preset(*gm);
        return cfg;
    }
    const auto base_method = parse_gray_method(base);
    if (!base_method)
        throw ParameterError("unknown base method '" + std::string(base) + "'");
    cfg.base_method = *base_method;
    if (name == "bp") {
        cfg.kind = MethodKind::bright_pixels;
        cfg.base = gray_preset(*base_method);
        return cfg;
    }
    if (name == "pbp") {
        const PbpParams p = pbp_preset(*base_method, n);
        cfg.kind = MethodKind::pbp;
        cfg.base = p.base;
        cfg.sample_fraction = p.sample_fraction;
        cfg.interval = p.downsample_interval;
        cfg.grid_factor = p.grid_factor;
        cfg.brightness_power = p.brightness_power;
        return cfg;
    }
    throw ParameterError("unknown method '" + std::string(name) + "'");
}

inline Illuminant run_method(const LinearImage& image, const MethodConfig& cfg) {
    switch (cfg.kind) {
    case MethodKind::gray:
        return gray_framework_estimate(equidistant_downsample(image, cfg.interval), cfg.base);
    case MethodKind::bright_pixels:
        return bright_pixels_estimate(equidistant_downsample(image, cfg.interval), cfg.sample_fraction, cfg.base);
    case MethodKind::pbp:
        return pbp_estimate(image, cfg.pbp_params());
    }
    throw ParameterError("unknown method kind");
}

} // namespace pbp::harness
