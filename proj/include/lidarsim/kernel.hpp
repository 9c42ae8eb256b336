#pragma once

#include "lidarsim/error.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lidarsim
{

enum class Normalization
{
    raw,
    peak,
    sum,
};

std::string to_string(Normalization n);
Normalization normalization_from_string(const std::string& s);

/**
 * Centered angular grid with odd dimensions, e.g. the effective beam kernel
 * CE = C * E. Row index runs along the vertical angle, column index along the
 * horizontal angle; the center cell sits at (rows / 2, cols / 2).
 *
 * The step is stored in degrees so that files written with a decimal step
 * round-trip without loss.
 */
struct AngularGrid
{
    int rows = 1;
    int cols = 1;
    double step_deg = 0.01;
    Normalization normalization = Normalization::raw;
    std::vector<double> values;

    static AngularGrid zeros(int rows, int cols, double step_deg);

    int half_rows() const { return rows / 2; }
    int half_cols() const { return cols / 2; }
    double step_rad() const;

    double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    /// Value at a vertical/horizontal offset from the center cell; 0 outside.
    double at_offset(int dv, int du) const;

    double sum() const;
    double max() const;
    void validate() const;
};

struct SeparableKernel
{
    /// Horizontal factor (cols entries) and vertical factor (rows entries).
    std::vector<double> h;
    std::vector<double> v;
    /// ||K - v h^T||_F / ||K||_F.
    double residual = 0.0;
    double step_deg = 0.01;

    AngularGrid outer() const;
};

inline constexpr int kMaxKernelSide = 8193;

/// Peak-normalized sampled Gaussian with half extents ceil(extent * sigma / step).
AngularGrid gaussian_kernel(double sigma_h, double sigma_v, double extent, double step, int max_side = kMaxKernelSide);

/// Gaussian core plus a wider Gaussian tail scaled by `tail_amplitude`, spanning
/// `extent` tail sigmas; peak-normalized.
AngularGrid composite_gaussian(double core_sigma, double tail_sigma, double tail_amplitude, double extent, double step,
                               int max_side = kMaxKernelSide);

enum class ResamplePolicy
{
    forbid,
    bilinear,
};

/// Elementwise product E * C. Mismatched grids throw unless resampling is allowed,
/// in which case the collector is bilinearly resampled onto the emitter grid.
AngularGrid combine(const AngularGrid& emitter, const AngularGrid& collector,
                    ResamplePolicy policy = ResamplePolicy::forbid);

/// Bilinear resampling onto a grid with the given step and half extents.
AngularGrid resample(const AngularGrid& g, double step_deg, int half_rows, int half_cols);

/// Resample to `step_deg`, keeping the angular extent.
AngularGrid resample_to_step(const AngularGrid& g, double step_deg);

/// Integer shift so the maximum sits at the center cell; dimensions are kept.
AngularGrid center_on_peak(const AngularGrid& g);

/// Best rank-1 approximation via power iteration (always returned).
SeparableKernel rank1_approximation(const AngularGrid& kernel);

/// Rank-1 factors, or nullopt when the residual exceeds `tolerance`.
std::optional<SeparableKernel> separate(const AngularGrid& kernel, double tolerance);

AngularGrid normalize(const AngularGrid& kernel, Normalization mode);

/// Outer product grid(r, c) = v[r] * h[c] of two single-row slices.
AngularGrid slices_to_grid(const AngularGrid& h_slice, const AngularGrid& v_slice);

// ---- text grid files -------------------------------------------------------

/// Header key/value pairs plus row-major data of a text grid file.
struct TextGrid
{
    std::map<std::string, std::string> header;
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
};

TextGrid read_text_grid(std::istream& in, const std::string& source);
using HeaderList = std::vector<std::pair<std::string, std::string>>;

/// Writes `leading`, rows, cols, `trailing` headers, then rows of 17-digit values.
void write_text_grid(std::ostream& out, const HeaderList& leading, int rows, int cols, const HeaderList& trailing,
                     const std::vector<double>& values);
std::string format_double(double v);

AngularGrid load_grid(const std::filesystem::path& path);
AngularGrid parse_grid(std::istream& in, const std::string& source);
void save_grid(const AngularGrid& g, const std::filesystem::path& path);
void write_grid(const AngularGrid& g, std::ostream& out);

AngularGrid load_measurement(const std::filesystem::path& path);
AngularGrid load_sensitivity_slices(const std::filesystem::path& h_path, const std::filesystem::path& v_path);

} // namespace lidarsim
