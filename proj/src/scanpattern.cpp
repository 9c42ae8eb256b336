#include "lidarsim/scanpattern.hpp"

#include "lidarsim/kernel.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace lidarsim
{

void ScanPattern::validate() const
{
    std::unordered_set<int> seen;
    for (const auto& b : beams)
        if (!seen.insert(b.id).second)
            throw DomainError("duplicate beam id " + std::to_string(b.id));
}

ScanPattern grid_pattern(double h_fov, double v_fov, int nh, int nv)
{
    if (!(h_fov >= 0.0 && v_fov >= 0.0 && h_fov < kPi && v_fov < kPi))
        throw DomainError("scan pattern fields of view must lie in [0, 180) degrees");
    if (nh < 1 || nv < 1)
        throw DomainError("scan pattern needs at least one beam per axis");
    auto spread = [](double fov, int n, int i) {
        return n == 1 ? 0.0 : -0.5 * fov + fov * static_cast<double>(i) / (n - 1);
    };
    ScanPattern p;
    p.beams.reserve(static_cast<std::size_t>(nh) * nv);
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nh; ++i)
        {
            Beam b;
            b.id = j * nh + i;
            b.beta = {spread(h_fov, nh, i), 0.5 * kPi + spread(v_fov, nv, j)};
            p.beams.push_back(b);
        }
    return p;
}

namespace
{

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
    {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out)
{
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

} // namespace

ScanPattern parse_pattern(std::istream& in, const std::string& source)
{
    ScanPattern p;
    std::unordered_set<int> seen;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#')
            continue;
        const auto cells = split_csv(line);
        if (!header_seen)
        {
            header_seen = true;
            if (cells.size() == 3 && cells[0] == "id")
            {
                if (cells[1] != "phi_deg" || cells[2] != "theta_deg")
                    throw ParseError(source, lineno, "expected header id,phi_deg,theta_deg");
                continue;
            }
        }
        if (cells.size() != 3)
            throw ParseError(source, lineno, "expected 3 columns, got " + std::to_string(cells.size()));
        Beam b;
        double phi = 0.0;
        double theta = 0.0;
        if (!parse_number(cells[0], b.id) || !parse_number(cells[1], phi) || !parse_number(cells[2], theta))
            throw ParseError(source, lineno, "malformed row '" + line + "'");
        if (!(theta >= 0.0 && theta <= 180.0) || !(phi >= -180.0 && phi < 180.0))
            throw ParseError(source, lineno, "angles out of range (phi in [-180, 180), theta in [0, 180])");
        if (!seen.insert(b.id).second)
            throw ParseError(source, lineno, "duplicate beam id " + cells[0]);
        b.beta = {deg2rad(phi), deg2rad(theta)};
        p.beams.push_back(b);
    }
    if (p.beams.empty())
        throw ParseError(source, lineno, "scan pattern contains no beams");
    return p;
}

ScanPattern load_pattern(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(path.string(), 0, "cannot open file");
    return parse_pattern(in, path.string());
}

void write_pattern(const ScanPattern& p, std::ostream& out)
{
    out << "id,phi_deg,theta_deg\n";
    for (const auto& b : p.beams)
        out << b.id << ',' << format_double(rad2deg(b.beta.phi)) << ',' << format_double(rad2deg(b.beta.theta))
            << '\n';
}

void save_pattern(const ScanPattern& p, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw ParseError(path.string(), 0, "cannot open file for writing");
    write_pattern(p, out);
}

} // namespace lidarsim
