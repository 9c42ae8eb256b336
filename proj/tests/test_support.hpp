#pragma once

#include "lidarsim/kernel.hpp"
#include "lidarsim/scanpattern.hpp"
#include "lidarsim/scene.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace testsupport
{

using namespace lidarsim;

/// Random G-buffer: ranges drawn from a few discrete depths so that slices are
/// shared by many pixels, ~10% misses, normals facing the sensor.
inline GBuffer random_gbuffer(int w, int h, double step_deg, std::mt19937_64& rng, double r_lo = 2.0,
                              double r_hi = 20.0)
{
    const double f = 1.0 / std::tan(deg2rad(step_deg));
    GBuffer g(PinholeProjection::centered(w, h, f));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> depth(0, 7);
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        if (unit(rng) < 0.1)
        {
            g.range[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        g.range[i] = r_lo + (r_hi - r_lo) * (depth(rng) + 0.5 * unit(rng)) / 8.0;
        g.intensity[i] = std::pow(10.0, -6.0 + 6.0 * unit(rng));
        g.ambient[i] = 0.01 * unit(rng);
        g.normal[i] = {0, 0, -1};
    }
    return g;
}

inline AngularGrid random_kernel(int max_side, double step_deg, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> half(0, max_side / 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    AngularGrid k = AngularGrid::zeros(2 * half(rng) + 1, 2 * half(rng) + 1, step_deg);
    for (auto& v : k.values)
        v = unit(rng);
    return k;
}

/// One beam per pixel center.
inline ScanPattern pixel_center_pattern(const PinholeProjection& proj, int stride = 1)
{
    ScanPattern p;
    int id = 0;
    for (int v = 0; v < proj.height_px; v += stride)
        for (int u = 0; u < proj.width_px; u += stride)
        {
            const Vec3 d = pixel_to_direction({u + 0.5, v + 0.5}, proj);
            p.beams.push_back({id++, SphericalAngle::from_direction(d)});
        }
    return p;
}

inline double rel_dev(double a, double b)
{
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

} // namespace testsupport
