#include "lidarsim/simulate.hpp"

#include "lidarsim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lidarsim
{

void SimConfig::validate() const
{
    if (!(delta_r > 0.0) || !std::isfinite(delta_r))
        throw DomainError("range bin width must be positive");
    if (!(r_max > delta_r) || !std::isfinite(r_max))
        throw DomainError("maximum range must exceed the bin width");
    if (!(rho_min >= 0.0))
        throw DomainError("threshold intensity must be non-negative");
    if (bin_count() > 10'000'000)
        throw DomainError("too many range bins");
}

int SimConfig::bin_count() const
{
    return static_cast<int>(std::floor(r_max / delta_r + 1e-9));
}

int SimConfig::bin_of(double range) const
{
    if (!std::isfinite(range) || range < 0.0)
        return -1;
    const double s = std::floor(range / delta_r);
    return s < bin_count() ? static_cast<int>(s) : -1;
}

RangeInterval pixel_range_interval(long u, long v, const GBuffer& g, const SimConfig& config)
{
    const double rho = g.range[g.index(u, v)];
    if (config.range_mode == PixelRangeMode::point)
        return {rho, rho, false};

    const PinholeProjection& proj = g.projection;
    const Vec3 n = g.normal[g.index(u, v)];
    const Vec3 center = pixel_to_direction({u + 0.5, v + 0.5}, proj);
    RangeInterval out{rho, rho, false};
    for (int corner = 0; corner < 4; ++corner)
    {
        const Vec3 c = pixel_to_direction({static_cast<double>(u + (corner & 1)), static_cast<double>(v + (corner >> 1))},
                                           proj);
        const CorrectedRange r = normals_range_correction(center, c, n, rho);
        if (r.grazing)
        {
            out = {rho - 0.5 * config.delta_r, rho + 0.5 * config.delta_r, true};
            break;
        }
        out.r0 = std::min(out.r0, r.range);
        out.r1 = std::max(out.r1, r.range);
    }
    out.r0 = std::clamp(out.r0, 0.0, config.r_max);
    out.r1 = std::clamp(out.r1, 0.0, config.r_max);
    return out;
}

std::optional<std::pair<long, long>> beam_pixel(const Beam& beam, const PinholeProjection& proj)
{
    const Vec3 d = beam.beta.direction();
    if (!(d.z > 0.0))
        return std::nullopt;
    long u = 0;
    long v = 0;
    if (!round_to_pixel(direction_to_pixel(d, proj), proj, u, v))
        return std::nullopt;
    return std::make_pair(u, v);
}

AngularGrid match_pixel_pitch(const AngularGrid& kernel, const PinholeProjection& proj)
{
    kernel.validate();
    const double pitch = proj.center_pitch();
    if (std::abs(kernel.step_rad() - pitch) <= 1e-9 * pitch)
        return kernel;
    return resample_to_step(kernel, rad2deg(pitch));
}

namespace
{

/// Bin span [first, last] of a pixel, first = -1 when it contributes nothing.
std::pair<int, int> pixel_bins(long u, long v, const GBuffer& g, const SimConfig& config)
{
    if (!std::isfinite(g.range[g.index(u, v)]))
        return {-1, -1};
    const RangeInterval iv = pixel_range_interval(u, v, g, config);
    const int bins = config.bin_count();
    const double s0 = std::floor(iv.r0 / config.delta_r);
    if (!(s0 < bins))
        return {-1, -1};
    const double s1 = std::min<double>(std::floor(iv.r1 / config.delta_r), bins - 1);
    return {static_cast<int>(s0), static_cast<int>(s1)};
}

} // namespace

BeamIntegrator::BeamIntegrator(const GBuffer& g, const AngularGrid& kernel, const SimConfig& config)
    : g_(g)
    , kernel_(match_pixel_pitch(kernel, g.projection))
    , config_(config)
    , bins_(config.bin_count())
{
    config.validate();
    g.validate();
    const long w = g.width();
    const long h = g.height();
    first_bin_.assign(g.size(), -1);
    last_bin_.assign(g.size(), -1);
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long v = 0; v < h; ++v)
        for (long u = 0; u < w; ++u)
        {
            const auto [s0, s1] = pixel_bins(u, v, g, config);
            first_bin_[g.index(u, v)] = s0;
            last_bin_[g.index(u, v)] = s1;
        }
}

BeamSample BeamIntegrator::integrate_at(long u, long v, std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    BeamSample sample{true, 0.0};
    const int N = kernel_.half_rows();
    const int M = kernel_.half_cols();
    const long w = g_.width();
    const long h = g_.height();
    for (int n = -N; n <= N; ++n)
    {
        const long vv = v + n;
        if (vv < 0 || vv >= h)
            continue;
        for (int m = -M; m <= M; ++m)
        {
            const long uu = u + m;
            if (uu < 0 || uu >= w)
                continue;
            const double k = kernel_(n + N, m + M);
            const std::size_t idx = g_.index(uu, vv);
            sample.ambient += g_.ambient[idx] * k;
            const int s0 = first_bin_[idx];
            if (s0 < 0)
                continue;
            const int s1 = last_bin_[idx];
            double c = g_.intensity[idx] * k;
            if (s1 == s0)
            {
                out[s0] += c;
                continue;
            }
            c /= static_cast<double>(s1 - s0 + 1);
            for (int s = s0; s <= s1; ++s)
                out[s] += c;
        }
    }
    return sample;
}

BeamSample BeamIntegrator::integrate(const Beam& beam, std::span<double> out) const
{
    const auto px = beam_pixel(beam, g_.projection);
    if (!px)
    {
        std::fill(out.begin(), out.end(), 0.0);
        return {};
    }
    return integrate_at(px->first, px->second, out);
}

EchoSignals beam_iteration(const GBuffer& g, const AngularGrid& kernel, const ScanPattern& pattern,
                           const SimConfig& config)
{
    const BeamIntegrator integrator(g, kernel, config);
    EchoSignals out;
    out.bins = static_cast<std::size_t>(integrator.bins());
    const std::size_t nb = pattern.size();
    out.data.assign(nb * out.bins, 0.0);
    out.ambient.assign(nb, 0.0);
    out.in_view.assign(nb, 0);
    const long count = static_cast<long>(nb);
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_count())
    for (long b = 0; b < count; ++b)
    {
        const auto s = integrator.integrate(pattern.beams[b],
                                            std::span<double>(out.data.data() + b * out.bins, out.bins));
        out.ambient[b] = s.ambient;
        out.in_view[b] = s.in_view ? 1 : 0;
    }
    return out;
}

std::optional<DominantEcho> dominant_echo(std::span<const double> signal, const SimConfig& config)
{
    std::optional<DominantEcho> best;
    for (int s = static_cast<int>(signal.size()) - 1; s >= 0; --s)
    {
        const double x = signal[s];
        if (!(x > 0.0 && x >= config.rho_min))
            continue;
        if (config.propagation == Propagation::nearest || !best || x >= best->intensity)
            best = DominantEcho{s, x};
    }
    return best;
}

namespace
{

struct FullConvolver
{
    const AngularGrid& kernel;
    int half_rows() const { return kernel.half_rows(); }
    int half_cols() const { return kernel.half_cols(); }
    double sum() const { return kernel.sum(); }
    void operator()(const Plane& in, const Rect& r, Plane& out) const { correlate_full(in, kernel, r, out); }
};

struct SeparableConvolver
{
    const SeparableKernel& kernel;
    int half_rows() const { return static_cast<int>(kernel.v.size()) / 2; }
    int half_cols() const { return static_cast<int>(kernel.h.size()) / 2; }
    double sum() const
    {
        double sh = 0.0;
        double sv = 0.0;
        for (double x : kernel.h)
            sh += x;
        for (double x : kernel.v)
            sv += x;
        return sh * sv;
    }
    void operator()(const Plane& in, const Rect& r, Plane& out) const { correlate_separable(in, kernel, r, out); }
};

template <typename Convolver>
StackResult stack_impl(const GBuffer& g, const Convolver& conv, const SimConfig& config, const StackOptions& options)
{
    config.validate();
    g.validate();
    if (config.range_mode != PixelRangeMode::point)
        throw DomainError("range stacking requires point pixel range mode");

    const int w = g.width();
    const int h = g.height();
    const int bins = config.bin_count();
    StackResult out;
    out.width = w;
    out.height = h;
    out.bin.assign(g.size(), -1);
    out.intensity.assign(g.size(), 0.0);
    out.slices_total = bins;

    // Bucket pixels by bin (counting sort keeps pixel order within a slice).
    std::vector<std::int32_t> pixel_bin(g.size());
    std::vector<std::size_t> start(static_cast<std::size_t>(bins) + 1, 0);
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        pixel_bin[i] = config.bin_of(g.range[i]);
        if (pixel_bin[i] >= 0)
            ++start[pixel_bin[i] + 1];
    }
    for (int s = 0; s < bins; ++s)
        start[s + 1] += start[s];
    std::vector<std::size_t> order(start.back());
    {
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (pixel_bin[i] >= 0)
                order[fill[pixel_bin[i]]++] = i;
    }

    const double kernel_sum = conv.sum();
    const int N = conv.half_rows();
    const int M = conv.half_cols();
    Plane slice(w, h);
    Plane response(w, h);

    for (int s = bins - 1; s >= 0; --s)
    {
        const std::size_t b = start[s];
        const std::size_t e = start[s + 1];
        if (options.skip != SliceSkip::none && b == e)
            continue;

        Rect region{w, h, 0, 0};
        double slice_max = 0.0;
        for (std::size_t k = b; k < e; ++k)
        {
            const std::size_t i = order[k];
            const int x = static_cast<int>(i % w);
            const int y = static_cast<int>(i / w);
            region.x0 = std::min(region.x0, x);
            region.y0 = std::min(region.y0, y);
            region.x1 = std::max(region.x1, x + 1);
            region.y1 = std::max(region.y1, y + 1);
            slice_max = std::max(slice_max, g.intensity[i]);
        }
        if (options.skip == SliceSkip::threshold && slice_max * kernel_sum * (1.0 + 1e-12) < config.rho_min)
            continue;

        if (options.skip == SliceSkip::none)
            region = {0, 0, w, h};
        else
            region = {std::max(0, region.x0 - M), std::max(0, region.y0 - N), std::min(w, region.x1 + M),
                      std::min(h, region.y1 + N)};

        for (std::size_t k = b; k < e; ++k)
            slice.values[order[k]] = g.intensity[order[k]];
        conv(slice, region, response);
        for (std::size_t k = b; k < e; ++k)
            slice.values[order[k]] = 0.0;
        ++out.slices_processed;

        const bool strongest = config.propagation == Propagation::strongest;
#pragma omp parallel for schedule(static) num_threads(worker_count())
        for (int y = region.y0; y < region.y1; ++y)
            for (int x = region.x0; x < region.x1; ++x)
            {
                const double val = response(x, y);
                if (!(val > 0.0 && val >= config.rho_min))
                    continue;
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                if (strongest && out.bin[i] >= 0 && val < out.intensity[i])
                    continue;
                out.intensity[i] = val;
                out.bin[i] = s;
            }
    }
    return out;
}

} // namespace

StackResult range_stacking(const GBuffer& g, const AngularGrid& kernel, const SimConfig& config,
                           const StackOptions& options)
{
    const AngularGrid k = match_pixel_pitch(kernel, g.projection);
    return stack_impl(g, FullConvolver{k}, config, options);
}

StackResult range_stacking(const GBuffer& g, const SeparableKernel& kernel, const SimConfig& config,
                           const StackOptions& options)
{
    const double pitch = g.projection.center_pitch();
    if (std::abs(deg2rad(kernel.step_deg) - pitch) > 1e-9 * pitch)
        throw DomainError("separable kernel step does not match the pixel pitch; separate a pitch-matched grid");
    if (kernel.h.size() % 2 == 0 || kernel.v.size() % 2 == 0)
        throw DomainError("separable kernel factors need odd lengths");
    return stack_impl(g, SeparableConvolver{kernel}, config, options);
}

std::vector<BeamEcho> sample_beams(const StackResult& stack, const ScanPattern& pattern,
                                   const PinholeProjection& proj, const SimConfig& config)
{
    std::vector<BeamEcho> out(pattern.size());
    for (std::size_t b = 0; b < pattern.size(); ++b)
    {
        const auto px = beam_pixel(pattern.beams[b], proj);
        if (!px || px->first >= stack.width || px->second >= stack.height)
            continue;
        const std::size_t i = stack.index(px->first, px->second);
        if (stack.bin[i] < 0 || !(stack.intensity[i] > 0.0))
            continue;
        out[b] = {true, config.bin_center(stack.bin[i]), stack.intensity[i], stack.bin[i]};
    }
    return out;
}

Plane ambient_map(const GBuffer& g, const AngularGrid& kernel)
{
    const AngularGrid k = match_pixel_pitch(kernel, g.projection);
    Plane in(g.width(), g.height());
    in.values = g.ambient;
    Plane out(g.width(), g.height());
    correlate_full(in, k, Rect::full(in), out);
    return out;
}

} // namespace lidarsim
