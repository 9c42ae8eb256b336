#include "lidarsim/reference.hpp"

#include <cmath>

namespace lidarsim::reference
{

std::vector<double> oracle_direct(const GBuffer& g, const AngularGrid& kernel, const Beam& beam,
                                  const SimConfig& config)
{
    config.validate();
    const AngularGrid ce = match_pixel_pitch(kernel, g.projection);
    const int bins = config.bin_count();
    std::vector<double> eta(static_cast<std::size_t>(bins), 0.0);
    const auto px = beam_pixel(beam, g.projection);
    if (!px)
        return eta;

    const int N = ce.half_rows();
    const int M = ce.half_cols();
    for (int n = -N; n <= N; ++n)
    {
        for (int m = -M; m <= M; ++m)
        {
            const long u = px->first + m;
            const long v = px->second + n;
            if (!g.projection.contains_pixel(u, v))
                continue;
            if (!std::isfinite(g.range[g.index(u, v)]))
                continue;
            const RangeInterval iv = pixel_range_interval(u, v, g, config);
            const int s0 = static_cast<int>(std::floor(iv.r0 / config.delta_r));
            int s1 = static_cast<int>(std::floor(iv.r1 / config.delta_r));
            if (s0 >= bins)
                continue;
            if (s1 >= bins)
                s1 = bins - 1;
            const double contribution = g.intensity[g.index(u, v)] * ce(n + N, m + M);
            const int count = s1 - s0 + 1;
            for (int s = s0; s <= s1; ++s)
                eta[s] += count == 1 ? contribution : contribution / count;
        }
    }
    return eta;
}

Plane correlate_serial(const Plane& in, const AngularGrid& kernel)
{
    Plane out(in.width, in.height);
    const int N = kernel.half_rows();
    const int M = kernel.half_cols();
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x)
        {
            double acc = 0.0;
            for (int n = -N; n <= N; ++n)
                for (int m = -M; m <= M; ++m)
                {
                    const int sx = x + m;
                    const int sy = y + n;
                    if (sx < 0 || sy < 0 || sx >= in.width || sy >= in.height)
                        continue;
                    acc += in(sx, sy) * kernel(n + N, m + M);
                }
            out(x, y) = acc;
        }
    return out;
}

StackResult range_stacking_serial(const GBuffer& g, const AngularGrid& kernel, const SimConfig& config)
{
    config.validate();
    const AngularGrid ce = match_pixel_pitch(kernel, g.projection);
    const int w = g.width();
    const int h = g.height();
    const int bins = config.bin_count();
    StackResult out;
    out.width = w;
    out.height = h;
    out.bin.assign(g.size(), -1);
    out.intensity.assign(g.size(), 0.0);
    out.slices_total = bins;
    for (int s = bins - 1; s >= 0; --s)
    {
        Plane slice(w, h);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (config.bin_of(g.range[i]) == s)
                slice.values[i] = g.intensity[i];
        const Plane response = correlate_serial(slice, ce);
        ++out.slices_processed;
        for (std::size_t i = 0; i < g.size(); ++i)
        {
            const double val = response.values[i];
            if (!(val > 0.0 && val >= config.rho_min))
                continue;
            if (config.propagation == Propagation::strongest && out.bin[i] >= 0 && val < out.intensity[i])
                continue;
            out.intensity[i] = val;
            out.bin[i] = s;
        }
    }
    return out;
}

} // namespace lidarsim::reference
