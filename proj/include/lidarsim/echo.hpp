#pragma once

#include "lidarsim/error.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lidarsim
{

/// Emitted pulse shape over range offsets, sampled at the range bin width and
/// peak-normalized. Odd length, centered.
struct PulseShape
{
    double step = 0.1;
    std::vector<double> samples{1.0};

    static PulseShape delta(double step);
    /// Gaussian with standard deviation `sigma_r` (range units) truncated at
    /// `extent` sigmas.
    static PulseShape gaussian(double sigma_r, double step, double extent = 5.0);

    void validate() const;
};

/// Text grid with rows=1 and a `step=<delta_r>` header.
PulseShape load_pulse(const std::filesystem::path& path);
PulseShape parse_pulse(std::istream& in, const std::string& source);
void write_pulse(const PulseShape& p, std::ostream& out);

struct DetectionConfig
{
    double threshold = 1.0;
    /// Multiplier converting ambient intensity to an additive threshold offset.
    double ambient_gain = 0.0;

    void validate() const;
    double effective_threshold(double ambient) const { return threshold + ambient_gain * ambient; }
};

struct Echo
{
    double r0 = 0.0;
    double r1 = 0.0;
    double epw = 0.0;
    double peak = 0.0;
    int index = 0;
};

/// eta_hat = pulse * eta over range bins, zero outside [0, r_max].
std::vector<double> convolve_pulse(std::span<const double> eta, const PulseShape& pulse, double delta_r);

/**
 * All maximal intervals where eta_hat exceeds T + gain * ambient. Sample i sits
 * at the bin center (i + 0.5) * delta_r; crossings are interpolated linearly
 * between neighbouring samples. Echoes are ordered by r0.
 */
std::vector<Echo> detect_echoes(std::span<const double> eta_hat, double delta_r, const DetectionConfig& cfg,
                                double ambient = 0.0);

enum class EchoPolicy
{
    nearest,
    strongest,
    longest,
};

/// Ties go to the echo with the lower r0.
std::optional<Echo> select_echo(std::span<const Echo> echoes, EchoPolicy policy);

} // namespace lidarsim
