#pragma once

#include "lidarsim/convolve.hpp"
#include "lidarsim/kernel.hpp"
#include "lidarsim/scanpattern.hpp"
#include "lidarsim/scene.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace lidarsim
{

enum class Propagation
{
    nearest,
    strongest,
};

enum class PixelRangeMode
{
    /// Each pixel contributes at its own range only.
    point,
    /// Each pixel contributes over the range interval its footprint spans,
    /// extrapolated from the pixel range and surface normal.
    extent,
};

struct SimConfig
{
    double delta_r = 0.1;
    double r_max = 120.0;
    double rho_min = 0.0;
    Propagation propagation = Propagation::nearest;
    PixelRangeMode range_mode = PixelRangeMode::point;

    void validate() const;
    /// Number of range bins; bin s covers [s * delta_r, (s + 1) * delta_r).
    int bin_count() const;
    /// Bin index of a range, or -1 when not finite or beyond the last bin.
    int bin_of(double range) const;
    /// Bin-center readout (s + 0.5) * delta_r.
    double bin_center(int s) const { return (s + 0.5) * delta_r; }
};

struct RangeInterval
{
    double r0 = 0.0;
    double r1 = 0.0;
    bool grazing = false;
};

/**
 * Range interval covered by pixel (u, v). Point mode gives [rho, rho]; extent
 * mode applies the normals correction at the four pixel corners and clamps to
 * [0, r_max]. Grazing surfaces collapse to one bin width around rho.
 */
RangeInterval pixel_range_interval(long u, long v, const GBuffer& g, const SimConfig& config);

/// Containing pixel of a beam's central direction, or nullopt outside the view.
std::optional<std::pair<long, long>> beam_pixel(const Beam& beam, const PinholeProjection& proj);

/// Kernel resampled (bilinear) to the pixel pitch at the image center if needed.
AngularGrid match_pixel_pitch(const AngularGrid& kernel, const PinholeProjection& proj);

/// Per-beam received intensities over range bins, stored beam-major.
struct EchoSignals
{
    std::size_t bins = 0;
    std::vector<double> data;
    /// Kernel-weighted ambient intensity seen by each beam.
    std::vector<double> ambient;
    /// 0 for beams outside the rendered view.
    std::vector<std::uint8_t> in_view;

    std::size_t beam_count() const { return in_view.size(); }
    std::span<const double> signal(std::size_t b) const { return {data.data() + b * bins, bins}; }
};

/// Result of integrating one beam.
struct BeamSample
{
    bool in_view = false;
    double ambient = 0.0;
};

/**
 * Precomputed state for the beam iteration: pitch-matched kernel and per-pixel
 * bin intervals. Immutable after construction; `integrate` may be called from
 * many threads at once.
 */
class BeamIntegrator
{
public:
    BeamIntegrator(const GBuffer& g, const AngularGrid& kernel, const SimConfig& config);

    /// Accumulates the beam's signal into `out` (bin_count() entries, zeroed first).
    BeamSample integrate(const Beam& beam, std::span<double> out) const;
    BeamSample integrate_at(long u, long v, std::span<double> out) const;

    int bins() const { return bins_; }
    const AngularGrid& kernel() const { return kernel_; }

private:
    const GBuffer& g_;
    AngularGrid kernel_;
    SimConfig config_;
    int bins_;
    std::vector<std::int32_t> first_bin_;
    std::vector<std::int32_t> last_bin_;
};

/// Beam iteration over all beams of the pattern, parallel over beams.
EchoSignals beam_iteration(const GBuffer& g, const AngularGrid& kernel, const ScanPattern& pattern,
                           const SimConfig& config);

struct DominantEcho
{
    int bin = -1;
    double intensity = 0.0;
};

/**
 * Reduces a beam signal to its dominant echo using the same rule as range
 * stacking: bins are visited far to near, a bin qualifies when its value is
 * positive and >= rho_min; nearest keeps the last qualifying bin, strongest
 * keeps the largest value with ties going to the nearer bin.
 */
std::optional<DominantEcho> dominant_echo(std::span<const double> signal, const SimConfig& config);

enum class SliceSkip
{
    /// Every slice is convolved over the full image.
    none,
    /// Empty slices are skipped; others are convolved over their support only.
    empty,
    /// Also skip slices whose largest possible response (slice max x kernel sum)
    /// stays below rho_min.
    threshold,
};

struct StackOptions
{
    SliceSkip skip = SliceSkip::empty;
};

struct StackResult
{
    int width = 0;
    int height = 0;
    /// Dominant range bin per pixel, -1 where nothing qualified.
    std::vector<std::int32_t> bin;
    std::vector<double> intensity;
    int slices_total = 0;
    int slices_processed = 0;

    std::size_t index(long u, long v) const { return static_cast<std::size_t>(v) * width + u; }
};

/// Range stacking with the full 2D kernel.
StackResult range_stacking(const GBuffer& g, const AngularGrid& kernel, const SimConfig& config,
                           const StackOptions& options = {});

/// Range stacking with a separable kernel (horizontal pass, then vertical).
StackResult range_stacking(const GBuffer& g, const SeparableKernel& kernel, const SimConfig& config,
                           const StackOptions& options = {});

struct BeamEcho
{
    bool valid = false;
    double range = 0.0;
    double intensity = 0.0;
    int bin = -1;
};

/// Reads the dominant echo at each beam's pixel.
std::vector<BeamEcho> sample_beams(const StackResult& stack, const ScanPattern& pattern,
                                   const PinholeProjection& proj, const SimConfig& config);

/// Kernel-weighted ambient intensity at every pixel (one extra correlation).
Plane ambient_map(const GBuffer& g, const AngularGrid& kernel);

} // namespace lidarsim
