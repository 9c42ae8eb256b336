#include "lidarsim/pointcloud.hpp"

#include "lidarsim/kernel.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lidarsim
{

double echo_range(const Echo& e)
{
    return 0.5 * (e.r0 + e.r1);
}

PointCloud to_points(const ScanPattern& pattern, const std::vector<std::vector<Echo>>& echoes)
{
    if (echoes.size() != pattern.size())
        throw DomainError("echo list does not match the scan pattern");
    PointCloud cloud;
    for (std::size_t b = 0; b < pattern.size(); ++b)
    {
        const Beam& beam = pattern.beams[b];
        const Vec3 d = beam.beta.direction();
        for (const Echo& e : echoes[b])
        {
            PointRecord r;
            r.beam_id = beam.id;
            r.phi_deg = rad2deg(beam.beta.phi);
            r.theta_deg = rad2deg(beam.beta.theta);
            r.range = echo_range(e);
            r.x = d.x * r.range;
            r.y = d.y * r.range;
            r.z = d.z * r.range;
            r.intensity = e.peak;
            r.epw = e.epw;
            r.echo_idx = e.index;
            cloud.records.push_back(r);
        }
    }
    return cloud;
}

void write_csv(const PointCloud& cloud, std::ostream& out)
{
    out << kCsvHeader << '\n';
    for (const auto& r : cloud.records)
    {
        out << r.beam_id << ',' << format_double(r.phi_deg) << ',' << format_double(r.theta_deg) << ','
            << format_double(r.range) << ',' << format_double(r.x) << ',' << format_double(r.y) << ','
            << format_double(r.z) << ',' << format_double(r.intensity) << ',' << format_double(r.epw) << ','
            << r.echo_idx << '\n';
    }
}

void write_csv(const PointCloud& cloud, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError(path.string(), 0, "cannot open file for writing");
    write_csv(cloud, out);
}

namespace
{

template <typename T>
T field(const std::string& s, const std::string& source, std::size_t line)
{
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError(source, line, "malformed field '" + s + "'");
    return v;
}

} // namespace

PointCloud read_csv(std::istream& in, const std::string& source)
{
    PointCloud cloud;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw ParseError(source, 1, std::string("expected header ") + kCsvHeader);
    ++lineno;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (cells.size() != 10)
            throw ParseError(source, lineno, "expected 10 columns");
        PointRecord r;
        r.beam_id = field<int>(cells[0], source, lineno);
        r.phi_deg = field<double>(cells[1], source, lineno);
        r.theta_deg = field<double>(cells[2], source, lineno);
        r.range = field<double>(cells[3], source, lineno);
        r.x = field<double>(cells[4], source, lineno);
        r.y = field<double>(cells[5], source, lineno);
        r.z = field<double>(cells[6], source, lineno);
        r.intensity = field<double>(cells[7], source, lineno);
        r.epw = field<double>(cells[8], source, lineno);
        r.echo_idx = field<int>(cells[9], source, lineno);
        cloud.records.push_back(r);
    }
    return cloud;
}

PointCloud read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(path.string(), 0, "cannot open file");
    return read_csv(in, path.string());
}

void write_ply(const PointCloud& cloud, std::ostream& out)
{
    out << "ply\nformat ascii 1.0\n";
    for (const auto& [k, v] : cloud.metadata)
        out << "comment " << k << ' ' << v << '\n';
    out << "element vertex " << cloud.records.size() << '\n'
        << "property double x\nproperty double y\nproperty double z\n"
        << "property double intensity\nproperty double epw\n"
        << "end_header\n";
    for (const auto& r : cloud.records)
        out << format_double(r.x) << ' ' << format_double(r.y) << ' ' << format_double(r.z) << ' '
            << format_double(r.intensity) << ' ' << format_double(r.epw) << '\n';
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError(path.string(), 0, "cannot open file for writing");
    write_ply(cloud, out);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed)
{
    std::uint64_t h = seed;
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace lidarsim
