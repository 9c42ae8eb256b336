#include "lidarsim/pipeline.hpp"

#include "lidarsim/parallel.hpp"
#include "lidarsim/reference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace lidarsim
{

std::string to_string(Algorithm a)
{
    return a == Algorithm::range_stacking ? "range-stacking" : "beam-iteration";
}

Algorithm algorithm_from_string(const std::string& s)
{
    if (s == "beam-iteration")
        return Algorithm::beam_iteration;
    if (s == "range-stacking")
        return Algorithm::range_stacking;
    throw DomainError("unknown algorithm '" + s + "' (beam-iteration, range-stacking)");
}

Propagation propagation_from_string(const std::string& s)
{
    if (s == "nearest")
        return Propagation::nearest;
    if (s == "strongest")
        return Propagation::strongest;
    throw DomainError("unknown propagation '" + s + "' (nearest, strongest)");
}

PixelRangeMode range_mode_from_string(const std::string& s)
{
    if (s == "point")
        return PixelRangeMode::point;
    if (s == "extent")
        return PixelRangeMode::extent;
    throw DomainError("unknown pixel range mode '" + s + "' (point, extent)");
}

SliceSkip slice_skip_from_string(const std::string& s)
{
    if (s == "none")
        return SliceSkip::none;
    if (s == "empty")
        return SliceSkip::empty;
    if (s == "threshold")
        return SliceSkip::threshold;
    throw DomainError("unknown slice skip mode '" + s + "' (none, empty, threshold)");
}

std::optional<EchoPolicy> echo_policy_from_string(const std::string& s)
{
    if (s == "all")
        return std::nullopt;
    if (s == "nearest")
        return EchoPolicy::nearest;
    if (s == "strongest")
        return EchoPolicy::strongest;
    if (s == "longest")
        return EchoPolicy::longest;
    throw DomainError("unknown echo policy '" + s + "' (all, nearest, strongest, longest)");
}

void SimulationInputs::validate() const
{
    sim.validate();
    detection.validate();
    pulse.validate();
    kernel.validate();
    pattern.validate();
    if (pattern.empty())
        throw DomainError("scan pattern is empty");
    if (views.empty())
        throw DomainError("no G-buffer views given");
    for (const auto& v : views)
        v.validate();
    if (algorithm == Algorithm::range_stacking && sim.range_mode != PixelRangeMode::point)
        throw DomainError("range stacking requires pixel_range_mode = point");
    if (std::abs(pulse.step - sim.delta_r) > 1e-9 * sim.delta_r)
        throw DomainError("pulse step must equal the range bin width delta_r");
}

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Index of the first view containing each beam, -1 if none.
std::vector<int> assign_views(const SimulationInputs& in)
{
    std::vector<int> view(in.pattern.size(), -1);
    for (std::size_t b = 0; b < in.pattern.size(); ++b)
        for (std::size_t v = 0; v < in.views.size(); ++v)
            if (beam_pixel(in.pattern.beams[b], in.views[v].projection))
            {
                view[b] = static_cast<int>(v);
                break;
            }
    return view;
}

std::vector<Echo> finish(std::vector<Echo> echoes, const std::optional<EchoPolicy>& policy)
{
    if (!policy)
        return echoes;
    const auto pick = select_echo(echoes, *policy);
    return pick ? std::vector<Echo>{*pick} : std::vector<Echo>{};
}

} // namespace

std::vector<Echo> detect_beam(std::span<const double> signal, const SimulationInputs& in, double ambient)
{
    const std::vector<double> smoothed = convolve_pulse(signal, in.pulse, in.sim.delta_r);
    return finish(detect_echoes(smoothed, in.sim.delta_r, in.detection, ambient), in.echo_policy);
}

SimulationOutput run_simulation(const SimulationInputs& in)
{
    in.validate();
    SimulationOutput out;
    const std::vector<int> view_of = assign_views(in);
    const long nb = static_cast<long>(in.pattern.size());
    const int bins = in.sim.bin_count();
    std::vector<std::vector<Echo>> echoes(in.pattern.size());

    if (in.algorithm == Algorithm::beam_iteration)
    {
        const auto t0 = Clock::now();
        std::vector<BeamIntegrator> integrators;
        integrators.reserve(in.views.size());
        for (const auto& g : in.views)
            integrators.emplace_back(g, in.kernel, in.sim);
        std::vector<double> signals(static_cast<std::size_t>(nb) * bins, 0.0);
        std::vector<double> ambient(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_count())
        for (long b = 0; b < nb; ++b)
        {
            if (view_of[b] < 0)
                continue;
            const auto s = integrators[view_of[b]].integrate(
                in.pattern.beams[b], std::span<double>(signals.data() + b * bins, static_cast<std::size_t>(bins)));
            ambient[b] = s.ambient;
        }
        out.timing.core_s = seconds_since(t0);

        const auto t1 = Clock::now();
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_count())
        for (long b = 0; b < nb; ++b)
        {
            if (view_of[b] < 0)
                continue;
            echoes[b] = detect_beam(std::span<const double>(signals.data() + b * bins, static_cast<std::size_t>(bins)),
                                    in, ambient[b]);
        }
        out.timing.detection_s = seconds_since(t1);
    }
    else
    {
        const auto t0 = Clock::now();
        std::vector<std::vector<BeamEcho>> sampled;
        std::vector<Plane> ambient;
        for (const auto& g : in.views)
        {
            const AngularGrid k = match_pixel_pitch(in.kernel, g.projection);
            const auto sep = separate(k, in.separable_tolerance);
            const StackOptions opts{in.slice_skip};
            const StackResult stack = sep ? range_stacking(g, *sep, in.sim, opts) : range_stacking(g, k, in.sim, opts);
            out.used_separable = out.used_separable || sep.has_value();
            out.slices_total += stack.slices_total;
            out.slices_processed += stack.slices_processed;
            sampled.push_back(sample_beams(stack, in.pattern, g.projection, in.sim));
            ambient.push_back(ambient_map(g, k));
        }
        out.timing.core_s = seconds_since(t0);

        const auto t1 = Clock::now();
#pragma omp parallel num_threads(worker_count())
        {
            std::vector<double> signal(static_cast<std::size_t>(bins));
#pragma omp for schedule(dynamic, 8)
            for (long b = 0; b < nb; ++b)
            {
                const int v = view_of[b];
                if (v < 0 || !sampled[v][b].valid)
                    continue;
                const auto px = beam_pixel(in.pattern.beams[b], in.views[v].projection);
                std::fill(signal.begin(), signal.end(), 0.0);
                signal[sampled[v][b].bin] = sampled[v][b].intensity;
                echoes[b] = detect_beam(signal, in, ambient[v](static_cast<int>(px->first), static_cast<int>(px->second)));
            }
        }
        out.timing.detection_s = seconds_since(t1);
    }

    out.cloud = to_points(in.pattern, echoes);
    out.cloud.metadata = {{"config_hash", config_hash(in)},
                          {"algorithm", to_string(in.algorithm)},
                          {"beams", std::to_string(in.pattern.size())},
                          {"kernel", std::to_string(in.kernel.rows) + "x" + std::to_string(in.kernel.cols) + "@" +
                                         format_double(in.kernel.step_deg) + "deg"}};
    return out;
}

std::string config_hash(const SimulationInputs& in)
{
    std::ostringstream s;
    s << to_string(in.algorithm) << '|' << format_double(in.sim.delta_r) << '|' << format_double(in.sim.r_max) << '|'
      << format_double(in.sim.rho_min) << '|' << static_cast<int>(in.sim.propagation) << '|'
      << static_cast<int>(in.sim.range_mode) << '|' << format_double(in.detection.threshold) << '|'
      << format_double(in.detection.ambient_gain) << '|' << (in.echo_policy ? static_cast<int>(*in.echo_policy) : -1)
      << '|' << format_double(in.separable_tolerance) << '|' << in.pattern.size() << '|';
    std::uint64_t h = fnv1a(s.str());
    for (double x : in.kernel.values)
        h = fnv1a(format_double(x), h);
    for (double x : in.pulse.samples)
        h = fnv1a(format_double(x), h);
    for (const auto& b : in.pattern.beams)
        h = fnv1a(std::to_string(b.id) + format_double(b.beta.phi) + format_double(b.beta.theta), h);
    return hex64(h);
}

std::string cloud_hash(const PointCloud& cloud)
{
    std::ostringstream s;
    write_csv(cloud, s);
    return hex64(fnv1a(s.str()));
}

double relative_deviation(double a, double b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0)
        return 0.0;
    return std::abs(a - b) / scale;
}

ValidationReport validate_algorithms(const GBuffer& g, const AngularGrid& kernel, const ScanPattern& pattern,
                                     SimConfig config)
{
    config.range_mode = PixelRangeMode::point;
    ValidationReport rep;
    const AngularGrid k = match_pixel_pitch(kernel, g.projection);
    const EchoSignals sig = beam_iteration(g, k, pattern, config);
    const StackResult stack = range_stacking(g, k, config);
    const StackResult serial = reference::range_stacking_serial(g, k, config);

    for (std::size_t b = 0; b < pattern.size(); ++b)
    {
        const auto oracle = reference::oracle_direct(g, k, pattern.beams[b], config);
        const auto s = sig.signal(b);
        for (std::size_t i = 0; i < oracle.size(); ++i)
            rep.beam_vs_oracle = std::max(rep.beam_vs_oracle, relative_deviation(s[i], oracle[i]));

        const auto px = beam_pixel(pattern.beams[b], g.projection);
        if (!px)
            continue;
        ++rep.beams_compared;
        const auto dom = dominant_echo(s, config);
        const std::size_t idx = stack.index(px->first, px->second);
        const int stack_bin = stack.bin[idx];
        if ((dom ? dom->bin : -1) != stack_bin)
            ++rep.bin_mismatches;
        rep.stack_vs_beam =
            std::max(rep.stack_vs_beam, relative_deviation(dom ? dom->intensity : 0.0, stack.intensity[idx]));
    }
    for (std::size_t i = 0; i < stack.intensity.size(); ++i)
    {
        rep.stack_vs_serial = std::max(rep.stack_vs_serial, relative_deviation(stack.intensity[i], serial.intensity[i]));
        if (stack.bin[i] != serial.bin[i])
            rep.stack_vs_serial = std::max(rep.stack_vs_serial, 1.0);
    }

    if (const auto sep = separate(k, 1e-9))
    {
        const StackResult s2 = range_stacking(g, *sep, config);
        rep.separable_vs_full = 0.0;
        for (std::size_t i = 0; i < stack.intensity.size(); ++i)
            rep.separable_vs_full =
                std::max(rep.separable_vs_full, relative_deviation(stack.intensity[i], s2.intensity[i]));
    }
    return rep;
}

} // namespace lidarsim
