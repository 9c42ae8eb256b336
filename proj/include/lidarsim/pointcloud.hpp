#pragma once

#include "lidarsim/echo.hpp"
#include "lidarsim/scanpattern.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lidarsim
{

struct PointRecord
{
    int beam_id = 0;
    double phi_deg = 0.0;
    double theta_deg = 0.0;
    double range = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double intensity = 0.0;
    double epw = 0.0;
    int echo_idx = 0;

    bool operator==(const PointRecord&) const = default;
};

struct PointCloud
{
    std::vector<PointRecord> records;
    /// Frame metadata (config hash, pattern, kernel id), written as PLY comments.
    std::vector<std::pair<std::string, std::string>> metadata;
};

/// Reported range of an echo: the midpoint of its threshold interval.
double echo_range(const Echo& e);

/// One record per echo, beams in pattern order; beams without echoes are dropped.
PointCloud to_points(const ScanPattern& pattern, const std::vector<std::vector<Echo>>& echoes);

inline constexpr const char* kCsvHeader = "beam_id,phi_deg,theta_deg,range,x,y,z,intensity,epw,echo_idx";

void write_csv(const PointCloud& cloud, std::ostream& out);
void write_csv(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_csv(std::istream& in, const std::string& source);
PointCloud read_csv(const std::filesystem::path& path);

void write_ply(const PointCloud& cloud, std::ostream& out);
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);

/// 64-bit FNV-1a, used for output and config hashes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

} // namespace lidarsim
