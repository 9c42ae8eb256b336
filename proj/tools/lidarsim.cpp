// lidarsim command line: render, kernel, pattern, simulate, validate, plot.

#include "lidarsim/gbuffer_io.hpp"
#include "lidarsim/parallel.hpp"
#include "lidarsim/pipeline.hpp"
#include "lidarsim/plot.hpp"
#include "lidarsim/run_config.hpp"
#include "lidarsim/scene_file.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace lidarsim;
namespace fs = std::filesystem;

namespace
{

int report(const std::string& code, const std::string& message, const std::string& path = {}, std::size_t line = 0)
{
    nlohmann::json j = {{"code", code}, {"message", message}};
    if (!path.empty())
        j["path"] = path;
    if (line)
        j["line"] = line;
    std::cerr << "error: " << j.dump() << '\n';
    return 2;
}

void print_seconds(const char* name, double s)
{
    std::printf("%s=%.6f\n", name, s);
}

struct RenderArgs
{
    std::string config;
    std::string scene;
    std::string out;
    int width = 0;
    int height = 0;
    double hfov_deg = 0.0;
    double clip_near = 0.0;
    double clip_far = 0.0;
    int clip_bits = 0;
    int supersample = 0;
    int normal_bits = -1;
    bool range_f64 = false;
};

int run_render(const RenderArgs& a)
{
    RunConfig cfg;
    if (!a.config.empty())
        cfg = load_run_config(a.config);
    if (!a.scene.empty())
        cfg.scene = a.scene;
    if (!a.out.empty())
        cfg.out_gbuffer = a.out;
    if (!cfg.scene)
        throw DomainError("no scene given (config 'scene' or --scene)");
    if (!cfg.out_gbuffer)
        throw DomainError("no output path given (config 'output.gbuffer' or --out)");
    if (!fs::is_regular_file(*cfg.scene))
        throw ParseError(cfg.scene->string(), 0, "file not found");

    SceneFile sf = load_scene(*cfg.scene);
    std::optional<PinholeProjection> proj = cfg.projection ? cfg.projection : sf.projection;
    if (a.width > 0 || a.height > 0 || a.hfov_deg > 0.0)
    {
        if (a.width <= 0 || a.height <= 0 || a.hfov_deg <= 0.0)
            throw DomainError("--width, --height and --hfov-deg must be given together");
        proj = PinholeProjection::from_hfov(a.width, a.height, deg2rad(a.hfov_deg));
    }
    if (!proj)
        throw DomainError("no projection given (scene/config 'projection' or --width/--height/--hfov-deg)");
    RenderOptions opts = sf.render;
    if (cfg.clip)
        opts.clip = cfg.clip;
    if (a.clip_bits > 0)
    {
        ClipPlanes c;
        c.near = a.clip_near;
        c.far = a.clip_far;
        c.bit_depth = a.clip_bits;
        c.validate();
        opts.clip = c;
    }
    if (a.supersample > 0)
        opts.supersample = a.supersample;
    if (a.normal_bits >= 0)
        opts.normal_bits = a.normal_bits;
    if (a.range_f64 && opts.clip)
        throw DomainError("--range-f64 cannot be combined with depth quantization");

    const GBuffer g = render_gbuffer(sf.scene, *proj, opts);
    write_gbuffer(g, *cfg.out_gbuffer, a.range_f64 ? RangePrecision::f64 : RangePrecision::f32);
    std::printf("wrote %s (%dx%d)\n", cfg.out_gbuffer->string().c_str(), g.width(), g.height());
    return 0;
}

struct SimulateArgs
{
    std::string config;
    std::vector<std::string> gbuffers;
    std::string kernel;
    std::string emitter;
    std::string collector;
    std::string pattern;
    std::string pulse;
    std::optional<double> pulse_sigma_r;
    std::string algorithm;
    std::optional<double> delta_r;
    std::optional<double> r_max;
    std::optional<double> rho_min;
    std::string propagation;
    std::string range_mode;
    std::optional<double> threshold;
    std::optional<double> ambient_gain;
    std::string echo_policy;
    std::string slice_skip;
    std::optional<double> separable_tolerance;
    std::string out_csv;
    std::string out_ply;
};

RunConfig simulate_config(const SimulateArgs& a)
{
    RunConfig cfg;
    if (!a.config.empty())
        cfg = load_run_config(a.config);
    if (!a.gbuffers.empty())
        cfg.gbuffers.assign(a.gbuffers.begin(), a.gbuffers.end());
    if (!a.kernel.empty())
    {
        cfg.kernel = a.kernel;
        cfg.emitter.reset();
        cfg.collector.reset();
    }
    if (!a.emitter.empty())
        cfg.emitter = a.emitter;
    if (!a.collector.empty())
        cfg.collector = a.collector;
    if (!a.pattern.empty())
    {
        cfg.pattern = a.pattern;
        cfg.pattern_grid.reset();
    }
    if (!a.pulse.empty())
    {
        cfg.pulse = a.pulse;
        cfg.pulse_sigma_r = 0.0;
    }
    if (a.pulse_sigma_r)
    {
        cfg.pulse_sigma_r = *a.pulse_sigma_r;
        cfg.pulse.reset();
    }
    if (!a.algorithm.empty())
        cfg.algorithm = algorithm_from_string(a.algorithm);
    if (a.delta_r)
        cfg.sim.delta_r = *a.delta_r;
    if (a.r_max)
        cfg.sim.r_max = *a.r_max;
    if (a.rho_min)
        cfg.sim.rho_min = *a.rho_min;
    if (!a.propagation.empty())
        cfg.sim.propagation = propagation_from_string(a.propagation);
    if (!a.range_mode.empty())
        cfg.sim.range_mode = range_mode_from_string(a.range_mode);
    if (a.threshold)
        cfg.detection.threshold = *a.threshold;
    if (a.ambient_gain)
        cfg.detection.ambient_gain = *a.ambient_gain;
    if (!a.echo_policy.empty())
        cfg.echo_policy = echo_policy_from_string(a.echo_policy);
    if (!a.slice_skip.empty())
        cfg.slice_skip = slice_skip_from_string(a.slice_skip);
    if (a.separable_tolerance)
        cfg.separable_tolerance = *a.separable_tolerance;
    if (!a.out_csv.empty())
        cfg.out_csv = a.out_csv;
    if (!a.out_ply.empty())
        cfg.out_ply = a.out_ply;
    return cfg;
}

int run_simulate(const SimulateArgs& a, int threads_flag)
{
    const RunConfig cfg = simulate_config(a);
    if (threads_flag <= 0 && cfg.threads > 0)
        set_worker_count(cfg.threads);
    const LoadedInputs loaded = load_inputs(cfg);
    const SimulationOutput out = run_simulation(loaded.inputs);
    if (cfg.out_csv)
        write_csv(out.cloud, *cfg.out_csv);
    if (cfg.out_ply)
        write_ply(out.cloud, *cfg.out_ply);

    std::printf("algorithm=%s\n", to_string(cfg.algorithm).c_str());
    std::printf("workers=%d\n", worker_count());
    print_seconds("ingest_s", loaded.ingest_s);
    print_seconds(cfg.algorithm == Algorithm::range_stacking ? "convolution_s" : "iteration_s", out.timing.core_s);
    print_seconds("detection_s", out.timing.detection_s);
    if (cfg.algorithm == Algorithm::range_stacking)
    {
        std::printf("slices_total=%d\n", out.slices_total);
        std::printf("slices_processed=%d\n", out.slices_processed);
        std::printf("slices_skipped=%d\n", out.slices_total - out.slices_processed);
        std::printf("separable=%s\n", out.used_separable ? "yes" : "no");
    }
    std::printf("points=%zu\n", out.cloud.records.size());
    std::printf("config_hash=%s\n", config_hash(loaded.inputs).c_str());
    std::printf("output_hash=%s\n", cloud_hash(out.cloud).c_str());
    return 0;
}

struct ValidateArgs
{
    std::string scene;
    std::string gbuffer;
    std::string kernel;
    double sigma_deg = 0.2;
    int nh = 48;
    int nv = 32;
    double delta_r = 0.1;
    double r_max = 120.0;
    std::string propagation = "nearest";
    double tolerance = 1e-12;
};

int run_validate(const ValidateArgs& a)
{
    if (a.scene.empty() == a.gbuffer.empty())
        throw DomainError("give exactly one of --scene or --gbuffer");
    for (const auto& f : {a.scene, a.gbuffer, a.kernel})
        if (!f.empty() && !fs::is_regular_file(f))
            throw ParseError(f, 0, "file not found");
    SimConfig sim;
    sim.delta_r = a.delta_r;
    sim.r_max = a.r_max;
    sim.propagation = propagation_from_string(a.propagation);
    sim.validate();

    GBuffer g;
    if (!a.scene.empty())
    {
        const SceneFile sf = load_scene(a.scene);
        if (!sf.projection)
            throw DomainError("scene has no projection");
        g = render_gbuffer(sf.scene, *sf.projection, sf.render);
    }
    else
        g = read_gbuffer(a.gbuffer);

    const double pitch_deg = rad2deg(g.projection.center_pitch());
    const AngularGrid kernel = a.kernel.empty()
                                   ? gaussian_kernel(deg2rad(a.sigma_deg), deg2rad(a.sigma_deg), 3.0, deg2rad(pitch_deg))
                                   : load_grid(a.kernel);
    const double hfov = 2.0 * std::atan(0.5 * (g.width() - 1) / g.projection.focal_px);
    const double vfov = 2.0 * std::atan(0.5 * (g.height() - 1) / g.projection.focal_px);
    const ScanPattern pattern = grid_pattern(hfov, vfov, a.nh, a.nv);

    const ValidationReport rep = validate_algorithms(g, kernel, pattern, sim);
    std::printf("beams=%d\n", rep.beams_compared);
    std::printf("beam_iteration_vs_oracle=%.3e\n", rep.beam_vs_oracle);
    std::printf("range_stacking_vs_beam_iteration=%.3e\n", rep.stack_vs_beam);
    std::printf("dominant_bin_mismatches=%d\n", rep.bin_mismatches);
    std::printf("range_stacking_vs_serial=%.3e\n", rep.stack_vs_serial);
    if (rep.separable_vs_full >= 0.0)
        std::printf("separable_vs_full=%.3e\n", rep.separable_vs_full);
    const bool ok = rep.beam_vs_oracle < a.tolerance && rep.stack_vs_beam < a.tolerance && rep.bin_mismatches == 0 &&
                    rep.stack_vs_serial < a.tolerance;
    std::printf("status=%s\n", ok ? "ok" : "deviation");
    if (!ok)
        return report("validation_failed", "max relative deviation exceeds " + format_double(a.tolerance));
    return 0;
}

void write_kernel(const AngularGrid& k, const std::string& out)
{
    save_grid(k, out);
    std::printf("wrote %s (%dx%d, step %s deg)\n", out.c_str(), k.rows, k.cols, format_double(k.step_deg).c_str());
}

AngularGrid row_grid(const std::vector<double>& values, double step_deg)
{
    AngularGrid g = AngularGrid::zeros(1, static_cast<int>(values.size()), step_deg);
    g.values = values;
    return g;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Time-of-flight LiDAR simulation with blooming and echo pulse width from G-buffers.\n"
                 "Worker count: --threads, else the LIDARSIM_THREADS environment variable, else all cores."};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = default)")->check(CLI::NonNegativeNumber);
    app.fallthrough();

    // render
    RenderArgs ra;
    auto* render = app.add_subcommand("render", "Raycast a scene file into a G-buffer");
    render->add_option("--config", ra.config, "Run config (YAML)");
    render->add_option("--scene", ra.scene, "Scene file (YAML)");
    render->add_option("-o,--out", ra.out, "Output G-buffer");
    render->add_option("--width", ra.width, "Image width in pixels");
    render->add_option("--height", ra.height, "Image height in pixels");
    render->add_option("--hfov-deg", ra.hfov_deg, "Horizontal field of view");
    render->add_option("--clip-near", ra.clip_near, "z-buffer near plane");
    render->add_option("--clip-far", ra.clip_far, "z-buffer far plane");
    render->add_option("--clip-bits", ra.clip_bits, "z-buffer bit depth (16, 24, 32)");
    render->add_option("--supersample", ra.supersample, "N x N rays per pixel");
    render->add_option("--normal-bits", ra.normal_bits, "Normal quantization bits (0 = exact)");
    render->add_flag("--range-f64", ra.range_f64, "Store ranges as 64-bit floats");

    // kernel
    auto* kernel = app.add_subcommand("kernel", "Build, combine, separate and normalize beam kernels");
    kernel->require_subcommand(1);
    struct
    {
        double sigma_h = 0.0, sigma_v = 0.0, extent = 4.0, step = 0.01;
        double core = 0.0, tail = 0.0, amplitude = 0.0;
        std::string emitter, collector, h, v, in, out, out_h, out_v, mode = "peak";
        bool resample = false;
        double tolerance = 1e-6;
    } ka;
    auto* kg = kernel->add_subcommand("gaussian", "Sampled Gaussian kernel");
    kg->add_option("--sigma-h-deg", ka.sigma_h, "Horizontal sigma")->required();
    kg->add_option("--sigma-v-deg", ka.sigma_v, "Vertical sigma (default: horizontal)");
    kg->add_option("--extent", ka.extent, "Half extent in sigmas")->capture_default_str();
    kg->add_option("--step-deg", ka.step, "Grid step")->capture_default_str();
    kg->add_option("-o,--out", ka.out, "Output grid")->required();
    auto* kc = kernel->add_subcommand("composite", "Gaussian core with a wide Gaussian tail");
    kc->add_option("--core-deg", ka.core, "Core sigma")->required();
    kc->add_option("--tail-deg", ka.tail, "Tail sigma")->required();
    kc->add_option("--tail-amplitude", ka.amplitude, "Tail amplitude relative to the core")->required();
    kc->add_option("--extent", ka.extent, "Half extent in tail sigmas")->capture_default_str();
    kc->add_option("--step-deg", ka.step, "Grid step")->capture_default_str();
    kc->add_option("-o,--out", ka.out, "Output grid")->required();
    auto* kb = kernel->add_subcommand("combine", "Elementwise product of emitter and collector grids");
    kb->add_option("--emitter", ka.emitter, "Emitter intensity grid")->required();
    kb->add_option("--collector", ka.collector, "Collector sensitivity grid")->required();
    kb->add_flag("--resample", ka.resample, "Bilinearly resample the collector onto the emitter grid");
    kb->add_option("-o,--out", ka.out, "Output grid")->required();
    auto* ks = kernel->add_subcommand("slices", "Outer product of horizontal and vertical 1D slices");
    ks->add_option("--horizontal", ka.h, "Horizontal slice (rows=1)")->required();
    ks->add_option("--vertical", ka.v, "Vertical slice (rows=1)")->required();
    ks->add_option("-o,--out", ka.out, "Output grid")->required();
    auto* kp = kernel->add_subcommand("separate", "Rank-1 factorization of a kernel");
    kp->add_option("--kernel", ka.in, "Input grid")->required();
    kp->add_option("--tolerance", ka.tolerance, "Max relative Frobenius residual")->capture_default_str();
    kp->add_option("--out-h", ka.out_h, "Horizontal factor output");
    kp->add_option("--out-v", ka.out_v, "Vertical factor output");
    auto* kn = kernel->add_subcommand("normalize", "Peak or sum normalization");
    kn->add_option("--kernel", ka.in, "Input grid")->required();
    kn->add_option("--mode", ka.mode, "raw, peak or sum")->capture_default_str();
    kn->add_option("-o,--out", ka.out, "Output grid")->required();

    // pattern
    struct
    {
        double h_fov = 0.0, v_fov = 0.0;
        int nh = 1, nv = 1;
        std::string out;
    } pa;
    auto* pattern = app.add_subcommand("pattern", "Write a regular grid scan pattern");
    pattern->add_option("--h-fov-deg", pa.h_fov, "Horizontal field of view")->required();
    pattern->add_option("--v-fov-deg", pa.v_fov, "Vertical field of view")->required();
    pattern->add_option("--nh", pa.nh, "Beams per row")->required();
    pattern->add_option("--nv", pa.nv, "Rows")->required();
    pattern->add_option("-o,--out", pa.out, "Output CSV")->required();

    // simulate
    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "G-buffer(s) + kernel + pattern -> point cloud");
    sim->add_option("--config", sa.config, "Run config (YAML)");
    sim->add_option("--gbuffer", sa.gbuffers, "G-buffer view (repeatable; first containing view wins)");
    sim->add_option("--kernel", sa.kernel, "Combined beam kernel grid");
    sim->add_option("--emitter", sa.emitter, "Emitter grid (with --collector)");
    sim->add_option("--collector", sa.collector, "Collector grid (with --emitter)");
    sim->add_option("--pattern", sa.pattern, "Scan pattern CSV");
    sim->add_option("--pulse", sa.pulse, "Pulse shape file");
    sim->add_option("--pulse-sigma-r", sa.pulse_sigma_r, "Gaussian pulse sigma in range units");
    sim->add_option("--algorithm", sa.algorithm, "beam-iteration or range-stacking");
    sim->add_option("--delta-r", sa.delta_r, "Range bin width");
    sim->add_option("--r-max", sa.r_max, "Maximum range");
    sim->add_option("--rho-min", sa.rho_min, "Minimum intensity kept during propagation");
    sim->add_option("--propagation", sa.propagation, "nearest or strongest");
    sim->add_option("--pixel-range-mode", sa.range_mode, "point or extent");
    sim->add_option("--threshold", sa.threshold, "Detection threshold");
    sim->add_option("--ambient-gain", sa.ambient_gain, "Threshold increase per unit ambient");
    sim->add_option("--echo-policy", sa.echo_policy, "all, nearest, strongest or longest");
    sim->add_option("--slice-skip", sa.slice_skip, "none, empty or threshold");
    sim->add_option("--separable-tolerance", sa.separable_tolerance, "Rank-1 residual accepted as separable");
    sim->add_option("--out-csv", sa.out_csv, "Point cloud CSV");
    sim->add_option("--out-ply", sa.out_ply, "Point cloud PLY");

    // validate
    ValidateArgs va;
    auto* val = app.add_subcommand("validate", "Cross-check beam iteration, range stacking and the oracle");
    val->add_option("--scene", va.scene, "Scene file to render");
    val->add_option("--gbuffer", va.gbuffer, "Existing G-buffer");
    val->add_option("--kernel", va.kernel, "Kernel grid (default: Gaussian at the pixel pitch)");
    val->add_option("--sigma-deg", va.sigma_deg, "Sigma of the default Gaussian kernel")->capture_default_str();
    val->add_option("--nh", va.nh, "Beams per row")->capture_default_str();
    val->add_option("--nv", va.nv, "Rows")->capture_default_str();
    val->add_option("--delta-r", va.delta_r, "Range bin width")->capture_default_str();
    val->add_option("--r-max", va.r_max, "Maximum range")->capture_default_str();
    val->add_option("--propagation", va.propagation, "nearest or strongest")->capture_default_str();
    val->add_option("--tolerance", va.tolerance, "Max accepted relative deviation")->capture_default_str();

    // plot
    struct
    {
        std::string cloud, out, view = "bev", color = "epw";
    } pl;
    auto* plot = app.add_subcommand("plot", "Render a point cloud CSV to SVG");
    plot->add_option("--cloud", pl.cloud, "Point cloud CSV")->required();
    plot->add_option("-o,--out", pl.out, "Output SVG")->required();
    plot->add_option("--view", pl.view, "bev or front")->capture_default_str();
    plot->add_option("--color", pl.color, "epw, intensity or range")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        return report("usage", e.what());
    }

    try
    {
        if (threads > 0)
            set_worker_count(threads);

        if (*render)
            return run_render(ra);
        if (*sim)
            return run_simulate(sa, threads);
        if (*val)
            return run_validate(va);
        if (*pattern)
        {
            const ScanPattern p = grid_pattern(deg2rad(pa.h_fov), deg2rad(pa.v_fov), pa.nh, pa.nv);
            save_pattern(p, pa.out);
            std::printf("wrote %s (%zu beams)\n", pa.out.c_str(), p.size());
            return 0;
        }
        if (*plot)
        {
            if (!fs::is_regular_file(pl.cloud))
                throw ParseError(pl.cloud, 0, "file not found");
            PlotView view;
            if (pl.view == "bev")
                view = PlotView::bev;
            else if (pl.view == "front")
                view = PlotView::front;
            else
                throw DomainError("unknown view '" + pl.view + "' (bev, front)");
            ColorBy color;
            if (pl.color == "epw")
                color = ColorBy::epw;
            else if (pl.color == "intensity")
                color = ColorBy::intensity;
            else if (pl.color == "range")
                color = ColorBy::range;
            else
                throw DomainError("unknown color '" + pl.color + "' (epw, intensity, range)");
            save_plot_svg(read_csv(fs::path(pl.cloud)), view, color, pl.out);
            std::printf("wrote %s\n", pl.out.c_str());
            return 0;
        }
        if (*kg)
        {
            const double sv = ka.sigma_v > 0.0 ? ka.sigma_v : ka.sigma_h;
            AngularGrid k = gaussian_kernel(deg2rad(ka.sigma_h), deg2rad(sv), ka.extent, deg2rad(ka.step));
            k.step_deg = ka.step;
            write_kernel(k, ka.out);
        }
        else if (*kc)
        {
            AngularGrid k = composite_gaussian(deg2rad(ka.core), deg2rad(ka.tail), ka.amplitude, ka.extent,
                                               deg2rad(ka.step));
            k.step_deg = ka.step;
            write_kernel(k, ka.out);
        }
        else if (*kb)
        {
            for (const auto& f : {ka.emitter, ka.collector})
                if (!fs::is_regular_file(f))
                    throw ParseError(f, 0, "file not found");
            write_kernel(combine(load_grid(ka.emitter), load_grid(ka.collector),
                                 ka.resample ? ResamplePolicy::bilinear : ResamplePolicy::forbid),
                         ka.out);
        }
        else if (*ks)
        {
            for (const auto& f : {ka.h, ka.v})
                if (!fs::is_regular_file(f))
                    throw ParseError(f, 0, "file not found");
            write_kernel(load_sensitivity_slices(ka.h, ka.v), ka.out);
        }
        else if (*kp)
        {
            if (!fs::is_regular_file(ka.in))
                throw ParseError(ka.in, 0, "file not found");
            const AngularGrid k = load_grid(ka.in);
            const SeparableKernel sep = rank1_approximation(k);
            std::printf("residual=%.6e\n", sep.residual);
            if (sep.residual > ka.tolerance)
                return report("not_separable", "rank-1 residual " + format_double(sep.residual) +
                                                   " exceeds tolerance " + format_double(ka.tolerance));
            if (!ka.out_h.empty())
                write_kernel(row_grid(sep.h, k.step_deg), ka.out_h);
            if (!ka.out_v.empty())
                write_kernel(row_grid(sep.v, k.step_deg), ka.out_v);
        }
        else if (*kn)
        {
            if (!fs::is_regular_file(ka.in))
                throw ParseError(ka.in, 0, "file not found");
            write_kernel(normalize(load_grid(ka.in), normalization_from_string(ka.mode)), ka.out);
        }
        return 0;
    }
    catch (const ParseError& e)
    {
        return report("input", e.what(), e.source(), e.line());
    }
    catch (const DomainError& e)
    {
        return report("domain", e.what());
    }
    catch (const std::exception& e)
    {
        return report("internal", e.what());
    }
}
