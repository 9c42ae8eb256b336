#pragma once

#include "lidarsim/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace lidarsim
{

struct Beam
{
    int id = 0;
    SphericalAngle beta;
    /// Reserved per-beam intensity scale; all beams share the same intensity.
    double scale = 1.0;
};

struct ScanPattern
{
    std::vector<Beam> beams;

    bool empty() const { return beams.empty(); }
    std::size_t size() const { return beams.size(); }
    /// Throws on duplicate ids.
    void validate() const;
};

/// nh x nv beams spanning the fields of view (endpoints included), row-major
/// from the top row; ids count up from 0.
ScanPattern grid_pattern(double h_fov, double v_fov, int nh, int nv);

/// CSV with header `id,phi_deg,theta_deg`.
ScanPattern parse_pattern(std::istream& in, const std::string& source);
ScanPattern load_pattern(const std::filesystem::path& path);
void write_pattern(const ScanPattern& p, std::ostream& out);
void save_pattern(const ScanPattern& p, const std::filesystem::path& path);

} // namespace lidarsim
