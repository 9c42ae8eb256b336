#pragma once

#include "lidarsim/echo.hpp"
#include "lidarsim/kernel.hpp"
#include "lidarsim/pointcloud.hpp"
#include "lidarsim/scanpattern.hpp"
#include "lidarsim/scene.hpp"
#include "lidarsim/simulate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lidarsim
{

enum class Algorithm
{
    beam_iteration,
    range_stacking,
};

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);
Propagation propagation_from_string(const std::string& s);
PixelRangeMode range_mode_from_string(const std::string& s);
SliceSkip slice_skip_from_string(const std::string& s);
std::optional<EchoPolicy> echo_policy_from_string(const std::string& s);

struct SimulationInputs
{
    /// Rendered sub-views; each beam uses the first view that contains it.
    std::vector<GBuffer> views;
    AngularGrid kernel;
    ScanPattern pattern;
    SimConfig sim;
    DetectionConfig detection;
    PulseShape pulse;
    Algorithm algorithm = Algorithm::beam_iteration;
    /// nullopt keeps every detected echo.
    std::optional<EchoPolicy> echo_policy;
    SliceSkip slice_skip = SliceSkip::empty;
    /// Range stacking uses the separable path when the rank-1 residual is below this.
    double separable_tolerance = 1e-9;

    /// Throws DomainError before any computation when inputs are inconsistent.
    void validate() const;
};

struct Timing
{
    double core_s = 0.0;
    double detection_s = 0.0;
};

struct SimulationOutput
{
    PointCloud cloud;
    Timing timing;
    int slices_total = 0;
    int slices_processed = 0;
    bool used_separable = false;
};

SimulationOutput run_simulation(const SimulationInputs& in);

/// Echoes of one beam signal: pulse convolution followed by threshold detection.
std::vector<Echo> detect_beam(std::span<const double> signal, const SimulationInputs& in, double ambient);

/// Deterministic hash of the simulation parameters.
std::string config_hash(const SimulationInputs& in);

/// Hash of the CSV serialization of a cloud.
std::string cloud_hash(const PointCloud& cloud);

struct ValidationReport
{
    /// Max relative deviation of beam iteration from the brute-force oracle.
    double beam_vs_oracle = 0.0;
    /// Max relative deviation between range stacking (full kernel) sampled at the
    /// beam pixels and the dominant echoes of the beam iteration.
    double stack_vs_beam = 0.0;
    /// Beams whose dominant bin differs between the two algorithms.
    int bin_mismatches = 0;
    /// Max relative deviation of the separable stacking path from the full path,
    /// or -1 when the kernel is not separable.
    double separable_vs_full = -1.0;
    /// Max relative deviation of the parallel stacking from the serial reference.
    double stack_vs_serial = 0.0;
    int beams_compared = 0;
};

ValidationReport validate_algorithms(const GBuffer& g, const AngularGrid& kernel, const ScanPattern& pattern,
                                     SimConfig config);

double relative_deviation(double a, double b);

} // namespace lidarsim
