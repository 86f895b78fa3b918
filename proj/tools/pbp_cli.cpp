#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pbp/all.hpp"
#include "pbp/harness/dataset.hpp"
#include "pbp/harness/manifest.hpp"
#include "pbp/harness/method.hpp"
#include "pbp/harness/report.hpp"
#include "pbp/harness/synth.hpp"

namespace fs = std::filesystem;
using namespace pbp;
using namespace pbp::harness;

namespace {

// Method selection plus the per-parameter overrides shared by subcommands.
struct MethodArgs {
    std::string method = "pbp";
    std::string base = "gw";
    std::size_t n = 1;
    int q = 1;
    double sample_frac = 0.0;
    std::size_t interval = 0;
    std::string minkowski_p;
    double smooth_sigma = 0.0;
    int derivative_order = 0;
    CLI::Option* q_opt = nullptr;
    CLI::Option* frac_opt = nullptr;
    CLI::Option* interval_opt = nullptr;
    CLI::Option* sigma_opt = nullptr;
    CLI::Option* order_opt = nullptr;

    void add(CLI::App* app, bool with_method = true) {
        if (with_method)
            app->add_option("--method", method, "gw, wp, sog, ggw, ge1, ge2, bp or pbp")->capture_default_str();
        app->add_option("--base", base, "gray-family base for bp / pbp")->capture_default_str();
        app->add_option("--n", n, "PBP grid factor (grid is 2n x 3n)")->capture_default_str();
        q_opt = app->add_option("--q", q, "PBP brightness power");
        frac_opt = app->add_option("--sample-frac", sample_frac, "bright pixel fraction in (0,1)");
        interval_opt = app->add_option("--interval", interval, "equidistant downsampling interval S");
        app->add_option("--minkowski-p", minkowski_p, "Minkowski order (number or inf)");
        sigma_opt = app->add_option("--smooth-sigma", smooth_sigma, "Gaussian smoothing sigma");
        order_opt = app->add_option("--derivative-order", derivative_order, "0, 1 or 2");
    }

    MethodConfig build(const std::string& name) const {
        MethodConfig cfg = make_method(name, base, n);
        if (cfg.kind == MethodKind::pbp)
            cfg.grid_factor = n;
        if (q_opt->count())
            cfg.brightness_power = q;
        if (frac_opt->count())
            cfg.sample_fraction = sample_frac;
        if (interval_opt->count())
            cfg.interval = interval;
        if (!minkowski_p.empty())
            cfg.base.minkowski_p = MinkowskiOrder::parse(minkowski_p);
        if (sigma_opt->count())
            cfg.base.smoothing_sigma = smooth_sigma;
        if (order_opt->count())
            cfg.base.derivative_order = derivative_order;
        cfg.validate();
        return cfg;
    }

    MethodConfig build() const { return build(method); }
};

struct PreprocessArgs {
    double saturation = 1.0;
    int bit_depth = 0;
    bool quantize = false;
    bool quantize_first = false;
    std::string mask;

    void add(CLI::App* app) {
        app->add_option("--saturation", saturation, "saturation clipping fraction in (0,1]")->capture_default_str();
        app->add_option("--bit-depth", bit_depth, "effective sensor bit depth (0 = container)");
        app->add_option("--mask", mask, "mask image; nonzero pixels are used");
        app->add_flag("--quantize", quantize, "quantize to 8 bits");
        app->add_flag("--quantize-first", quantize_first, "quantize before saturation clipping");
    }

    PreprocessConfig config() const {
        PreprocessConfig cfg;
        cfg.saturation_fraction = saturation;
        cfg.source_bit_depth = bit_depth;
        cfg.quantize_to_8bit = quantize;
        cfg.quantize_before_clip = quantize_first;
        cfg.validate();
        return cfg;
    }

    LinearImage load(const std::string& path) const {
        const PreprocessConfig cfg = config();
        LinearImage img = load_image(path, cfg);
        if (!mask.empty())
            img.apply_mask(load_mask(mask, img.height(), img.width()));
        return preprocess(img, cfg);
    }
};

struct RunArgs {
    bool quantize = false;
    bool quantize_first = false;
    std::size_t jobs = default_jobs();

    void add(CLI::App* app) {
        app->add_flag("--quantize", quantize, "quantize images to 8 bits");
        app->add_flag("--quantize-first", quantize_first, "quantize before saturation clipping");
        app->add_option("--jobs", jobs, "worker threads (default CC_JOBS or 1)");
    }

    RunOptions options() const { return {quantize, quantize_first, std::max<std::size_t>(1, jobs)}; }
};

Rgb parse_rgb(const std::string& s) {
    std::stringstream ss(s);
    Rgb v{};
    std::string part;
    for (int c = 0; c < 3; ++c) {
        if (!std::getline(ss, part, ','))
            throw ParameterError("expected r,g,b but got '" + s + "'");
        v[c] = std::stod(part);
    }
    return v;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    out << text;
}

int cmd_estimate(const MethodArgs& m, const PreprocessArgs& pre, const std::string& input, const std::string& out_json,
                 const std::string& corrected, double gamma) {
    const LinearImage img = pre.load(input);
    const MethodConfig cfg = m.build();
    const Illuminant e = run_method(img, cfg);
    nlohmann::json j;
    j["estimate"] = {e[0], e[1], e[2]};
    j["method"] = cfg.describe();
    write_text(out_json, j.dump(2) + "\n");
    if (!corrected.empty()) {
        LinearImage out = correct_image(load_image(input, pre.config()), e);
        out = quantize_8bit(out);
        if (gamma > 0.0)
            out = gamma_encode(out, gamma);
        save_png(out, corrected, 8);
    }
    return 0;
}

int cmd_eval(const MethodArgs& m, const RunArgs& run, const std::string& manifest_path,
             const std::vector<std::string>& methods, const std::string& group_by, const std::string& out_json,
             const std::string& out_csv, const std::string& errors_csv) {
    const auto manifest = read_manifest(manifest_path);
    std::vector<MethodConfig> configs;
    for (const auto& name : methods.empty() ? std::vector<std::string>{m.method} : methods)
        configs.push_back(m.build(name));
    const bool per_camera = group_by == "camera";
    const auto results = evaluate_methods(manifest, configs, run.options());

    nlohmann::json j = nlohmann::json::array();
    std::ostringstream csv;
    csv << kStatsCsvHeader << '\n';
    for (const auto& r : results) {
        j.push_back(dataset_json(r, per_camera));
        const auto stats = per_camera ? camera_averaged_stats(r) : r.stats;
        if (stats)
            write_stats_csv_row(csv, r.method.label(), *stats);
    }
    write_text(out_json, (results.size() == 1 ? j[0] : j).dump(2) + "\n");
    if (!out_csv.empty())
        write_text(out_csv, csv.str());
    if (!errors_csv.empty()) {
        std::ostringstream e;
        write_errors_csv(e, results.front());
        write_text(errors_csv, e.str());
    }
    for (const auto& r : results)
        if (!r.stats)
            return 1;
    return 0;
}

std::vector<MinkowskiOrder> parse_orders(const std::vector<std::string>& v) {
    std::vector<MinkowskiOrder> out;
    for (const auto& s : v)
        out.push_back(MinkowskiOrder::parse(s));
    return out;
}

int cmd_grid(const MethodArgs& m, const RunArgs& run, const std::string& manifest_path, const GridSpec& spec,
             const std::string& out_csv, const std::string& out_json) {
    const auto manifest = read_manifest(manifest_path);
    const auto g = grid_search(manifest, m.build(), spec, run.options());
    std::ostringstream csv;
    write_grid_csv(csv, g);
    write_text(out_csv, csv.str());
    const auto& best = g.best_row();
    nlohmann::json j;
    j["best"] = {{"method", best.method.describe()},
                 {"sample_fraction", best.method.sample_fraction},
                 {"interval", best.method.interval},
                 {"minkowski_p", best.method.base.minkowski_p.to_string()},
                 {"n", best.method.grid_factor},
                 {"q", best.method.brightness_power},
                 {"objective", best.objective}};
    if (best.stats)
        j["best"]["stats"] = stats_json(*best.stats);
    j["configurations"] = g.rows.size();
    if (!out_json.empty())
        write_text(out_json, j.dump(2) + "\n");
    else
        std::cerr << j.dump(2) << '\n';
    return best.stats ? 0 : 1;
}

int cmd_sweep(const MethodArgs& m, const RunArgs& run, const std::string& manifest_path,
              const std::vector<std::string>& methods, const std::vector<std::size_t>& intervals,
              const std::string& out_csv) {
    const auto manifest = read_manifest(manifest_path);
    std::vector<MethodConfig> configs;
    for (const auto& name : methods.empty() ? std::vector<std::string>{"gw", "wp", "sog", "ggw", "ge1", "ge2"} : methods)
        configs.push_back(m.build(name));
    const auto rows = downsample_sweep(manifest, configs, intervals, run.options());
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    write_text(out_csv, csv.str());
    return 0;
}

int cmd_bench(const MethodArgs& m, const PreprocessArgs& pre, const std::string& input, std::size_t repeats) {
    const LinearImage img = pre.load(input);
    const MethodConfig cfg = m.build();
    const BenchStats b = bench_single(img, cfg, repeats);
    nlohmann::json j{{"method", cfg.describe()}, {"height", img.height()}, {"width", img.width()},
                     {"repeats", b.repeats},     {"min_ms", b.min_ms},     {"mean_ms", b.mean_ms},
                     {"p95_ms", b.p95_ms},       {"timing_boundary", kTimingBoundary}};
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_gen_synth(const SynthConfig& cfg, const std::string& out_dir, std::size_t count, std::uint64_t seed,
                  int bits) {
    fs::create_directories(out_dir);
    std::vector<ManifestEntry> entries;
    for (std::size_t i = 0; i < count; ++i) {
        const auto scene = make_synthetic_scene(cfg, seed + i);
        char name[32];
        std::snprintf(name, sizeof name, "synth_%04zu.png", i);
        save_png(scene.image, fs::path(out_dir) / name, bits);
        ManifestEntry e;
        e.image_id = fs::path(name).stem().string();
        e.image_path = name;
        e.gt_rgb = scene.illuminant;
        e.camera_tag = "synthetic";
        entries.push_back(e);
    }
    std::ofstream out(fs::path(out_dir) / "manifest.csv");
    if (!out)
        throw IoError("cannot write manifest in '" + out_dir + "'");
    write_manifest(out, entries);
    return 0;
}

int cmd_groups(const PreprocessArgs& pre, const std::string& input, const std::string& gt, std::size_t groups,
               const std::string& out_csv) {
    const LinearImage img = pre.load(input);
    const auto rows = brightness_group_analysis(img, Illuminant(parse_rgb(gt)), groups);
    std::ostringstream csv;
    csv << "group,error_deg\n";
    for (const auto& r : rows)
        csv << r.group << ',' << r.error_deg << '\n';
    write_text(out_csv, csv.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Patch-wise bright pixels illuminant estimation and color constancy benchmarks"};
    app.require_subcommand(1);

    MethodArgs method;
    PreprocessArgs pre;
    RunArgs run;

    auto* estimate = app.add_subcommand("estimate", "estimate the illuminant of one image");
    std::string input, out_json, corrected;
    double gamma = 2.2;
    estimate->add_option("input", input, "PNG / PPM image")->required();
    method.add(estimate);
    pre.add(estimate);
    estimate->add_option("--out", out_json, "JSON output path (default stdout)");
    estimate->add_option("--corrected", corrected, "write the corrected image as 8-bit PNG");
    estimate->add_option("--gamma", gamma, "display gamma for --corrected (0 = linear)")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "evaluate methods over a manifest");
    std::string manifest, group_by = "none", out_csv, errors_csv;
    std::vector<std::string> methods;
    eval->add_option("manifest", manifest, "CSV manifest")->required();
    MethodArgs eval_method;
    eval_method.add(eval);
    run.add(eval);
    eval->add_option("--methods", methods, "several method names (overrides --method)")->delimiter(',');
    eval->add_option("--group-by", group_by, "none or camera")->check(CLI::IsMember({"none", "camera"}));
    eval->add_option("--out", out_json, "JSON output path (default stdout)");
    eval->add_option("--csv", out_csv, "summary statistics CSV");
    eval->add_option("--errors-csv", errors_csv, "per-image errors of the first method");

    auto* grid = app.add_subcommand("grid", "grid search over (fraction, S, p, n, q)");
    GridSpec spec{{0.005, 0.01, 0.02, 0.04}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, {}, {}, {}};
    std::vector<std::string> ps{"1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11"};
    grid->add_option("manifest", manifest, "CSV manifest")->required();
    MethodArgs grid_method;
    grid_method.add(grid);
    run.add(grid);
    grid->add_option("--fractions", spec.sample_fractions, "candidate sample fractions")->delimiter(',');
    grid->add_option("--intervals", spec.intervals, "candidate downsampling intervals")->delimiter(',');
    grid->add_option("--ps", ps, "candidate Minkowski orders")->delimiter(',');
    grid->add_option("--ns", spec.grid_factors, "candidate grid factors")->delimiter(',');
    grid->add_option("--qs", spec.brightness_powers, "candidate brightness powers")->delimiter(',');
    std::string grid_csv;
    grid->add_option("--csv", grid_csv, "all rows as CSV (default stdout)");
    grid->add_option("--out", out_json, "best configuration as JSON (default stderr)");

    auto* sweep = app.add_subcommand("sweep-downsample", "error and runtime against downsampling interval");
    std::vector<std::size_t> intervals{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    sweep->add_option("manifest", manifest, "CSV manifest")->required();
    MethodArgs sweep_method;
    sweep_method.add(sweep, false);
    run.add(sweep);
    sweep->add_option("--methods", methods, "method names (default: the gray family)")->delimiter(',');
    sweep->add_option("--intervals", intervals, "downsampling intervals")->delimiter(',');
    sweep->add_option("--csv", out_csv, "CSV output path (default stdout)");

    auto* bench = app.add_subcommand("bench", "time repeated estimates on one image");
    std::size_t repeats = 100;
    bench->add_option("input", input, "PNG / PPM image")->required();
    MethodArgs bench_method;
    bench_method.add(bench);
    PreprocessArgs bench_pre;
    bench_pre.add(bench);
    bench->add_option("--repeats", repeats, "timed repetitions")->capture_default_str();

    auto* synth = app.add_subcommand("gen-synth", "write synthetic scenes with exact ground truth");
    SynthConfig synth_cfg;
    std::string out_dir;
    std::size_t count = 100;
    std::uint64_t seed = 1;
    int bits = 16;
    synth->add_option("out_dir", out_dir, "output directory")->required();
    synth->add_option("--count", count)->capture_default_str();
    synth->add_option("--seed", seed, "seed of the first scene")->capture_default_str();
    synth->add_option("--height", synth_cfg.height)->capture_default_str();
    synth->add_option("--width", synth_cfg.width)->capture_default_str();
    synth->add_option("--white-fraction", synth_cfg.white_fraction)->capture_default_str();
    synth->add_option("--white-blob", synth_cfg.white_blob)->capture_default_str();
    synth->add_option("--distractor-fraction", synth_cfg.distractor_fraction)->capture_default_str();
    synth->add_option("--mondrian-rects", synth_cfg.mondrian_rects, "flat reflectance rectangles")->capture_default_str();
    synth->add_option("--mondrian-min", synth_cfg.mondrian_min)->capture_default_str();
    synth->add_option("--mondrian-max", synth_cfg.mondrian_max)->capture_default_str();
    synth->add_option("--bits", bits, "PNG bit depth")->check(CLI::IsMember({8, 16}))->capture_default_str();

    auto* groups = app.add_subcommand("brightness-groups", "error of brightness-sorted pixel groups");
    std::string gt;
    std::size_t group_count = 100;
    groups->add_option("input", input, "PNG / PPM image")->required();
    groups->add_option("--gt", gt, "ground-truth illuminant r,g,b")->required();
    groups->add_option("--groups", group_count)->capture_default_str();
    PreprocessArgs groups_pre;
    groups_pre.add(groups);
    groups->add_option("--csv", out_csv, "CSV output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate->parsed())
            return cmd_estimate(method, pre, input, out_json, corrected, gamma);
        if (eval->parsed())
            return cmd_eval(eval_method, run, manifest, methods, group_by, out_json, out_csv, errors_csv);
        if (grid->parsed()) {
            spec.minkowski_ps = parse_orders(ps);
            return cmd_grid(grid_method, run, manifest, spec, grid_csv, out_json);
        }
        if (sweep->parsed())
            return cmd_sweep(sweep_method, run, manifest, methods, intervals, out_csv);
        if (bench->parsed())
            return cmd_bench(bench_method, bench_pre, input, repeats);
        if (synth->parsed())
            return cmd_gen_synth(synth_cfg, out_dir, count, seed, bits);
        if (groups->parsed())
            return cmd_groups(groups_pre, input, gt, group_count, out_csv);
    } catch (const Error& e) {
        std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
