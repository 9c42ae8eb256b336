#include "lidarsim/run_config.hpp"

#include "lidarsim/scene_file.hpp"
#include "yaml_reader.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

namespace lidarsim
{

using detail::Reader;

namespace
{

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p)
{
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename Fn>
auto convert(const Reader& r, const YAML::Node& node, Fn fn)
{
    try
    {
        return fn(node.as<std::string>());
    }
    catch (const DomainError& e)
    {
        r.fail(node, e.what());
    }
}

} // namespace

void RunConfig::validate() const
{
    sim.validate();
    detection.validate();
    if (algorithm == Algorithm::range_stacking && sim.range_mode != PixelRangeMode::point)
        throw DomainError("range-stacking requires pixel_range_mode: point");
    if (kernel && (emitter || collector))
        throw DomainError("give either 'kernel' or 'emitter'/'collector', not both");
    if (emitter.has_value() != collector.has_value())
        throw DomainError("'emitter' and 'collector' must be given together");
    if (pattern && pattern_grid)
        throw DomainError("give either 'pattern' or 'pattern_grid', not both");
    if (pulse && pulse_sigma_r > 0.0)
        throw DomainError("give either 'pulse' or 'pulse_sigma_r', not both");
    if (pulse_sigma_r < 0.0)
        throw DomainError("pulse_sigma_r must be >= 0");
    if (separable_tolerance < 0.0)
        throw DomainError("separable_tolerance must be >= 0");
    if (threads < 0)
        throw DomainError("threads must be >= 0");
}

void RunConfig::check_inputs_exist() const
{
    std::vector<std::filesystem::path> files = gbuffers;
    for (const auto* p : {&scene, &kernel, &emitter, &collector, &pattern, &pulse})
        if (*p)
            files.push_back(**p);
    for (const auto& f : files)
        if (!std::filesystem::is_regular_file(f))
            throw ParseError(f.string(), 0, "file not found");
}

RunConfig parse_run_config(const std::string& text, const std::string& source, const std::filesystem::path& base_dir)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (const YAML::ParserException& e)
    {
        throw ParseError(source, static_cast<std::size_t>(e.mark.line + 1), e.msg);
    }
    if (root.IsNull())
        return {};
    if (!root.IsMap())
        throw ParseError(source, 0, "config file must be a mapping");
    const Reader r(source);
    RunConfig cfg;

    auto path_of = [&](const char* key) -> std::optional<std::filesystem::path> {
        if (const auto n = root[key])
            return resolve(base_dir, n.as<std::string>());
        return std::nullopt;
    };
    cfg.scene = path_of("scene");
    cfg.kernel = path_of("kernel");
    cfg.emitter = path_of("emitter");
    cfg.collector = path_of("collector");
    cfg.pattern = path_of("pattern");
    cfg.pulse = path_of("pulse");
    if (const auto g = root["gbuffers"])
    {
        if (g.IsScalar())
            cfg.gbuffers.push_back(resolve(base_dir, g.as<std::string>()));
        else if (g.IsSequence())
            for (const auto& item : g)
                cfg.gbuffers.push_back(resolve(base_dir, item.as<std::string>()));
        else
            r.fail(g, "'gbuffers' must be a path or a list of paths");
    }
    if (const auto g = root["pattern_grid"])
    {
        GridPatternSpec spec;
        spec.h_fov_deg = r.number(r.require(g, "h_fov_deg"), "h_fov_deg");
        spec.v_fov_deg = r.number(r.require(g, "v_fov_deg"), "v_fov_deg");
        spec.nh = r.integer(r.require(g, "nh"), "nh");
        spec.nv = r.integer(r.require(g, "nv"), "nv");
        cfg.pattern_grid = spec;
    }
    cfg.pulse_sigma_r = r.number_or(root, "pulse_sigma_r", 0.0);
    if (const auto p = root["projection"])
        cfg.projection = detail::read_projection(r, p);
    if (const auto c = root["clip"])
        cfg.clip = detail::read_clip(r, c);

    if (const auto s = root["sim"])
    {
        cfg.sim.delta_r = r.number_or(s, "delta_r", cfg.sim.delta_r);
        cfg.sim.r_max = r.number_or(s, "r_max", cfg.sim.r_max);
        cfg.sim.rho_min = r.number_or(s, "rho_min", cfg.sim.rho_min);
        if (s["propagation"])
            cfg.sim.propagation = convert(r, s["propagation"], propagation_from_string);
        if (s["pixel_range_mode"])
            cfg.sim.range_mode = convert(r, s["pixel_range_mode"], range_mode_from_string);
    }
    if (const auto d = root["detection"])
    {
        cfg.detection.threshold = r.number_or(d, "threshold", cfg.detection.threshold);
        cfg.detection.ambient_gain = r.number_or(d, "ambient_gain", cfg.detection.ambient_gain);
        if (d["echo_policy"])
            cfg.echo_policy = convert(r, d["echo_policy"], echo_policy_from_string);
    }
    if (root["algorithm"])
        cfg.algorithm = convert(r, root["algorithm"], algorithm_from_string);
    if (root["slice_skip"])
        cfg.slice_skip = convert(r, root["slice_skip"], slice_skip_from_string);
    cfg.separable_tolerance = r.number_or(root, "separable_tolerance", cfg.separable_tolerance);
    if (root["threads"])
        cfg.threads = r.integer(root["threads"], "threads");

    if (const auto o = root["output"])
    {
        auto out_of = [&](const char* key) -> std::optional<std::filesystem::path> {
            if (const auto n = o[key])
                return resolve(base_dir, n.as<std::string>());
            return std::nullopt;
        };
        cfg.out_gbuffer = out_of("gbuffer");
        cfg.out_csv = out_of("csv");
        cfg.out_ply = out_of("ply");
    }

    try
    {
        cfg.validate();
    }
    catch (const DomainError& e)
    {
        throw ParseError(source, 0, e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(path.string(), 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.string(), path.parent_path());
}

LoadedInputs load_inputs(const RunConfig& cfg)
{
    cfg.validate();
    cfg.check_inputs_exist();
    if (cfg.gbuffers.empty())
        throw DomainError("no G-buffer given (config 'gbuffers' or --gbuffer)");
    if (!cfg.kernel && !cfg.emitter)
        throw DomainError("no kernel given (config 'kernel' or --kernel)");
    if (!cfg.pattern && !cfg.pattern_grid)
        throw DomainError("no scan pattern given (config 'pattern'/'pattern_grid' or --pattern)");

    const auto t0 = std::chrono::steady_clock::now();
    LoadedInputs out;
    SimulationInputs& in = out.inputs;
    for (const auto& p : cfg.gbuffers)
        in.views.push_back(read_gbuffer(p));
    in.kernel = cfg.kernel ? load_grid(*cfg.kernel) : combine(load_grid(*cfg.emitter), load_grid(*cfg.collector));
    if (cfg.pattern)
        in.pattern = load_pattern(*cfg.pattern);
    else
    {
        const auto& g = *cfg.pattern_grid;
        in.pattern = grid_pattern(deg2rad(g.h_fov_deg), deg2rad(g.v_fov_deg), g.nh, g.nv);
    }
    if (cfg.pulse)
        in.pulse = load_pulse(*cfg.pulse);
    else if (cfg.pulse_sigma_r > 0.0)
        in.pulse = PulseShape::gaussian(cfg.pulse_sigma_r, cfg.sim.delta_r);
    else
        in.pulse = PulseShape::delta(cfg.sim.delta_r);
    in.sim = cfg.sim;
    in.detection = cfg.detection;
    in.algorithm = cfg.algorithm;
    in.echo_policy = cfg.echo_policy;
    in.slice_skip = cfg.slice_skip;
    in.separable_tolerance = cfg.separable_tolerance;
    out.ingest_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

} // namespace lidarsim
