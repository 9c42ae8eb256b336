#pragma once

#include "lidarsim/pointcloud.hpp"

#include <filesystem>
#include <string>

namespace lidarsim
{

enum class PlotView
{
    /// Bird's eye view: x to the right, forward (z) up the page.
    bev,
    /// Sensor view: x to the right, y down the page.
    front,
};

enum class ColorBy
{
    epw,
    intensity,
    range,
};

struct PlotLayout
{
    double width = 800.0;
    double height = 600.0;
    double margin = 40.0;
};

struct CanvasPoint
{
    double x = 0.0;
    double y = 0.0;
};

/// Affine map from data to canvas: uniform scale, data bounds centered.
class Viewport
{
public:
    Viewport(const PointCloud& cloud, PlotView view, const PlotLayout& layout = {});
    CanvasPoint map(const PointRecord& r) const;

private:
    PlotView view_;
    double scale_ = 1.0;
    double ox_ = 0.0;
    double oy_ = 0.0;
    double min_h_ = 0.0;
    double min_v_ = 0.0;
    double max_v_ = 0.0;
};

/// Deterministic SVG scatter plot with a fixed colormap.
std::string plot_svg(const PointCloud& cloud, PlotView view, ColorBy color_by, const PlotLayout& layout = {});
void save_plot_svg(const PointCloud& cloud, PlotView view, ColorBy color_by, const std::filesystem::path& path);

} // namespace lidarsim
