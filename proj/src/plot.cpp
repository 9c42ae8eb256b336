#include "lidarsim/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace lidarsim
{

namespace
{

double horizontal(const PointRecord& r, PlotView)
{
    return r.x;
}

double vertical(const PointRecord& r, PlotView view)
{
    return view == PlotView::bev ? r.z : r.y;
}

double color_value(const PointRecord& r, ColorBy c)
{
    switch (c)
    {
    case ColorBy::intensity:
        return r.intensity;
    case ColorBy::range:
        return r.range;
    case ColorBy::epw:
        break;
    }
    return r.epw;
}

const char* color_name(ColorBy c)
{
    switch (c)
    {
    case ColorBy::intensity:
        return "intensity";
    case ColorBy::range:
        return "range";
    case ColorBy::epw:
        break;
    }
    return "epw";
}

// viridis, five stops
constexpr std::array<std::array<double, 3>, 5> kStops = {{
    {68, 1, 84},
    {59, 82, 139},
    {33, 145, 140},
    {94, 201, 98},
    {253, 231, 37},
}};

std::array<int, 3> colormap(double t)
{
    t = std::clamp(t, 0.0, 1.0) * (kStops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), kStops.size() - 2);
    const double f = t - static_cast<double>(i);
    std::array<int, 3> out{};
    for (int c = 0; c < 3; ++c)
        out[c] = static_cast<int>(std::lround(kStops[i][c] * (1 - f) + kStops[i + 1][c] * f));
    return out;
}

} // namespace

Viewport::Viewport(const PointCloud& cloud, PlotView view, const PlotLayout& layout)
    : view_(view)
{
    double min_h = std::numeric_limits<double>::infinity();
    double max_h = -min_h;
    double min_v = min_h;
    double max_v = -min_h;
    for (const auto& r : cloud.records)
    {
        min_h = std::min(min_h, horizontal(r, view));
        max_h = std::max(max_h, horizontal(r, view));
        min_v = std::min(min_v, vertical(r, view));
        max_v = std::max(max_v, vertical(r, view));
    }
    if (cloud.records.empty())
    {
        min_h = min_v = -0.5;
        max_h = max_v = 0.5;
    }
    if (max_h - min_h <= 0.0)
    {
        min_h -= 0.5;
        max_h += 0.5;
    }
    if (max_v - min_v <= 0.0)
    {
        min_v -= 0.5;
        max_v += 0.5;
    }
    const double pw = layout.width - 2 * layout.margin;
    const double ph = layout.height - 2 * layout.margin;
    scale_ = std::min(pw / (max_h - min_h), ph / (max_v - min_v));
    ox_ = layout.margin + 0.5 * (pw - scale_ * (max_h - min_h));
    oy_ = layout.margin + 0.5 * (ph - scale_ * (max_v - min_v));
    min_h_ = min_h;
    min_v_ = min_v;
    max_v_ = max_v;
}

CanvasPoint Viewport::map(const PointRecord& r) const
{
    const double x = ox_ + (horizontal(r, view_) - min_h_) * scale_;
    // Forward points up in the bird's eye view; image y already points down.
    const double y = view_ == PlotView::bev ? oy_ + (max_v_ - vertical(r, view_)) * scale_
                                            : oy_ + (vertical(r, view_) - min_v_) * scale_;
    return {x, y};
}

std::string plot_svg(const PointCloud& cloud, PlotView view, ColorBy color_by, const PlotLayout& layout)
{
    const Viewport vp(cloud, view, layout);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& r : cloud.records)
    {
        lo = std::min(lo, color_value(r, color_by));
        hi = std::max(hi, color_value(r, color_by));
    }

    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                  layout.width, layout.height, layout.width, layout.height);
    out += buf;
    std::snprintf(buf, sizeof(buf), "<rect width=\"%.0f\" height=\"%.0f\" fill=\"#ffffff\"/>\n", layout.width,
                  layout.height);
    out += buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"%.0f\" y=\"%.0f\" font-size=\"12\">%s view, color: %s [%.6g, %.6g]</text>\n",
                  layout.margin, 0.5 * layout.margin, view == PlotView::bev ? "bev" : "front", color_name(color_by),
                  cloud.records.empty() ? 0.0 : lo, cloud.records.empty() ? 0.0 : hi);
    out += buf;
    out += "<g stroke=\"none\">\n";
    for (const auto& r : cloud.records)
    {
        const CanvasPoint p = vp.map(r);
        const double t = hi > lo ? (color_value(r, color_by) - lo) / (hi - lo) : 0.5;
        const auto c = colormap(t);
        std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"#%02x%02x%02x\"/>\n", p.x, p.y,
                      c[0], c[1], c[2]);
        out += buf;
    }
    out += "</g>\n</svg>\n";
    return out;
}

void save_plot_svg(const PointCloud& cloud, PlotView view, ColorBy color_by, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << plot_svg(cloud, view, color_by);
}

} // namespace lidarsim
