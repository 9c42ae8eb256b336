#include "lidarsim/convolve.hpp"

#include "lidarsim/parallel.hpp"

#include <algorithm>

namespace lidarsim
{

namespace
{

void check(const Plane& in, const Rect& region, const Plane& out)
{
    if (out.width != in.width || out.height != in.height)
        throw DomainError("correlation output must match the input size");
    if (region.x0 < 0 || region.y0 < 0 || region.x1 > in.width || region.y1 > in.height)
        throw DomainError("correlation region exceeds the image");
}

} // namespace

void correlate_full(const Plane& in, const AngularGrid& kernel, const Rect& region, Plane& out)
{
    check(in, region, out);
    if (region.empty())
        return;
    const int N = kernel.half_rows();
    const int M = kernel.half_cols();
    const int span = region.x1 - region.x0;
    const int padded = span + 2 * M;

#pragma omp parallel num_threads(worker_count())
    {
        std::vector<double> row(static_cast<std::size_t>(padded));
        std::vector<double> acc(static_cast<std::size_t>(span));
#pragma omp for schedule(static)
        for (int y = region.y0; y < region.y1; ++y)
        {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int n = -N; n <= N; ++n)
            {
                const int sy = y + n;
                if (sy < 0 || sy >= in.height)
                    continue;
                // Zero-padded copy of the source row covering x0 - M .. x1 + M.
                for (int i = 0; i < padded; ++i)
                {
                    const int sx = region.x0 - M + i;
                    row[i] = (sx < 0 || sx >= in.width) ? 0.0 : in(sx, sy);
                }
                const double* krow = &kernel.values[static_cast<std::size_t>(n + N) * kernel.cols];
                for (int m = 0; m < kernel.cols; ++m)
                {
                    const double k = krow[m];
                    const double* src = row.data() + m;
                    for (int i = 0; i < span; ++i)
                        acc[i] += src[i] * k;
                }
            }
            std::copy(acc.begin(), acc.end(), &out(region.x0, y));
        }
    }
}

void correlate_separable(const Plane& in, const SeparableKernel& kernel, const Rect& region, Plane& out)
{
    check(in, region, out);
    if (region.empty())
        return;
    const int N = static_cast<int>(kernel.v.size()) / 2;
    const int M = static_cast<int>(kernel.h.size()) / 2;
    const int span = region.x1 - region.x0;
    const int ty0 = std::max(0, region.y0 - N);
    const int ty1 = std::min(in.height, region.y1 + N);
    const int padded = span + 2 * M;
    // Horizontal pass over the rows the vertical pass will read.
    std::vector<double> tmp(static_cast<std::size_t>(ty1 - ty0) * span);

#pragma omp parallel num_threads(worker_count())
    {
        std::vector<double> row(static_cast<std::size_t>(padded));
#pragma omp for schedule(static)
        for (int y = ty0; y < ty1; ++y)
        {
            for (int i = 0; i < padded; ++i)
            {
                const int sx = region.x0 - M + i;
                row[i] = (sx < 0 || sx >= in.width) ? 0.0 : in(sx, y);
            }
            double* dst = &tmp[static_cast<std::size_t>(y - ty0) * span];
            std::fill(dst, dst + span, 0.0);
            for (int m = 0; m < static_cast<int>(kernel.h.size()); ++m)
            {
                const double k = kernel.h[m];
                const double* src = row.data() + m;
                for (int i = 0; i < span; ++i)
                    dst[i] += src[i] * k;
            }
        }

#pragma omp for schedule(static)
        for (int y = region.y0; y < region.y1; ++y)
        {
            double* dst = &out(region.x0, y);
            std::fill(dst, dst + span, 0.0);
            for (int n = -N; n <= N; ++n)
            {
                const int sy = y + n;
                if (sy < ty0 || sy >= ty1)
                    continue;
                const double k = kernel.v[n + N];
                const double* src = &tmp[static_cast<std::size_t>(sy - ty0) * span];
                for (int i = 0; i < span; ++i)
                    dst[i] += src[i] * k;
            }
        }
    }
}

} // namespace lidarsim
