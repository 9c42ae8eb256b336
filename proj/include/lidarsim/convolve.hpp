#pragma once

#include "lidarsim/kernel.hpp"

#include <cstddef>
#include <vector>

namespace lidarsim
{

/// Row-major 2D image of doubles.
struct Plane
{
    int width = 0;
    int height = 0;
    std::vector<double> values;

    Plane() = default;
    Plane(int w, int h, double fill = 0.0)
        : width(w)
        , height(h)
        , values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill)
    {
    }

    double& operator()(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double operator()(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Rect
{
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    bool empty() const { return x0 >= x1 || y0 >= y1; }
    static Rect full(const Plane& p) { return {0, 0, p.width, p.height}; }
};

/**
 * Centered correlation out(x, y) = sum_n sum_m in(x + m, y + n) * K(n, m),
 * evaluated over `region` only; cells outside the image contribute zero.
 *
 * Each output value accumulates kernel cells in row-major kernel order, the
 * same order as the beam iteration, so both produce identical sums.
 * Rows of the region are distributed over worker threads.
 */
void correlate_full(const Plane& in, const AngularGrid& kernel, const Rect& region, Plane& out);

/// Horizontal pass with `h` followed by a vertical pass with `v`.
void correlate_separable(const Plane& in, const SeparableKernel& kernel, const Rect& region, Plane& out);

} // namespace lidarsim
