#include "lidarsim/gbuffer_io.hpp"

#include "lidarsim/kernel.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace lidarsim
{

namespace
{

constexpr const char* kMagic = "lidarsim-gbuffer";
constexpr std::array<const char*, 6> kPlanes = {"intensity", "range", "normal_x", "normal_y", "normal_z", "ambient"};

template <typename T>
void put_le(std::ostream& out, T v)
{
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    out.write(bytes, sizeof(T));
}

template <typename T>
T from_le(const char* bytes)
{
    char tmp[sizeof(T)];
    std::memcpy(tmp, bytes, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(tmp, tmp + sizeof(T));
    T v;
    std::memcpy(&v, tmp, sizeof(T));
    return v;
}

double plane_value(const GBuffer& g, int plane, std::size_t i)
{
    switch (plane)
    {
    case 0:
        return g.intensity[i];
    case 1:
        return g.range[i];
    case 2:
        return g.normal[i].x;
    case 3:
        return g.normal[i].y;
    case 4:
        return g.normal[i].z;
    default:
        return g.ambient[i];
    }
}

void set_plane_value(GBuffer& g, int plane, std::size_t i, double v)
{
    switch (plane)
    {
    case 0:
        g.intensity[i] = v;
        break;
    case 1:
        g.range[i] = v;
        break;
    case 2:
        g.normal[i].x = v;
        break;
    case 3:
        g.normal[i].y = v;
        break;
    case 4:
        g.normal[i].z = v;
        break;
    default:
        g.ambient[i] = v;
        break;
    }
}

} // namespace

void write_gbuffer(const GBuffer& g, std::ostream& out, RangePrecision range_precision)
{
    g.validate();
    if (range_precision == RangePrecision::f64 && g.clip)
        throw DomainError("64-bit ranges are only stored for unquantized depth");
    out << kMagic << '\n'
        << "format_version=1\n"
        << "width=" << g.width() << '\n'
        << "height=" << g.height() << '\n'
        << "focal_px=" << format_double(g.projection.focal_px) << '\n'
        << "cx=" << format_double(g.projection.cx) << '\n'
        << "cy=" << format_double(g.projection.cy) << '\n';
    if (g.clip)
        out << "clip_near=" << format_double(g.clip->near) << '\n'
            << "clip_far=" << format_double(g.clip->far) << '\n'
            << "clip_bits=" << g.clip->bit_depth << '\n';
    out << "normal_bits=" << g.normal_bits << '\n'
        << "range_precision=" << (range_precision == RangePrecision::f64 ? "f64" : "f32") << '\n'
        << "planes=";
    for (std::size_t p = 0; p < kPlanes.size(); ++p)
        out << (p ? "," : "") << kPlanes[p];
    out << "\nend_header\n";
    for (int p = 0; p < static_cast<int>(kPlanes.size()); ++p)
        for (std::size_t i = 0; i < g.size(); ++i)
        {
            const double v = plane_value(g, p, i);
            if (p == 1 && range_precision == RangePrecision::f64)
                put_le<double>(out, v);
            else
                put_le<float>(out, static_cast<float>(v));
        }
}

void write_gbuffer(const GBuffer& g, const std::filesystem::path& path, RangePrecision range_precision)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError(path.string(), 0, "cannot open file for writing");
    write_gbuffer(g, out, range_precision);
    if (!out)
        throw ParseError(path.string(), 0, "write failed");
}

GBuffer read_gbuffer(std::istream& in, const std::string& source)
{
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line) || line != kMagic)
        throw ParseError(source, 1, "not a G-buffer file");
    std::map<std::string, std::string> header;
    bool ended = false;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line == "end_header")
        {
            ended = true;
            break;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(source, lineno, "malformed header line '" + line + "'");
        header[line.substr(0, eq)] = line.substr(eq + 1);
    }
    if (!ended)
        throw ParseError(source, lineno, "missing end_header");

    auto get = [&](const std::string& key) -> const std::string& {
        const auto it = header.find(key);
        if (it == header.end())
            throw ParseError(source, 0, "missing header '" + key + "'");
        return it->second;
    };
    auto num = [&](const std::string& key, auto& out) {
        const std::string& s = get(key);
        const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ParseError(source, 0, "header '" + key + "' is not a number");
    };

    int version = 0;
    num("format_version", version);
    if (version != 1)
        throw ParseError(source, 0, "unsupported format_version " + std::to_string(version));
    PinholeProjection proj;
    num("width", proj.width_px);
    num("height", proj.height_px);
    num("focal_px", proj.focal_px);
    num("cx", proj.cx);
    num("cy", proj.cy);
    GBuffer g;
    try
    {
        g = GBuffer(proj);
    }
    catch (const DomainError& e)
    {
        throw ParseError(source, 0, e.what());
    }
    if (header.count("clip_near"))
    {
        ClipPlanes c;
        num("clip_near", c.near);
        num("clip_far", c.far);
        num("clip_bits", c.bit_depth);
        g.clip = c;
    }
    if (header.count("normal_bits"))
        num("normal_bits", g.normal_bits);
    const std::string precision = header.count("range_precision") ? get("range_precision") : "f32";
    if (precision != "f32" && precision != "f64")
        throw ParseError(source, 0, "range_precision must be f32 or f64");
    const bool range64 = precision == "f64";

    std::vector<int> order;
    {
        std::istringstream ss(get("planes"));
        std::string name;
        while (std::getline(ss, name, ','))
        {
            int idx = -1;
            for (int p = 0; p < static_cast<int>(kPlanes.size()); ++p)
                if (name == kPlanes[p])
                    idx = p;
            if (idx < 0)
                throw ParseError(source, 0, "unknown plane '" + name + "'");
            for (int seen : order)
                if (seen == idx)
                    throw ParseError(source, 0, "duplicate plane '" + name + "'");
            order.push_back(idx);
        }
    }
    for (int p = 0; p < static_cast<int>(kPlanes.size()); ++p)
        if (std::find(order.begin(), order.end(), p) == order.end())
            throw ParseError(source, 0, std::string("missing plane '") + kPlanes[p] + "'");

    std::vector<char> buf;
    for (int p : order)
    {
        const std::size_t width = (p == 1 && range64) ? 8 : 4;
        buf.resize(g.size() * width);
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size())
            throw ParseError(source, 0, std::string("plane '") + kPlanes[p] + "' is truncated");
        for (std::size_t i = 0; i < g.size(); ++i)
        {
            const char* b = buf.data() + i * width;
            set_plane_value(g, p, i, width == 8 ? from_le<double>(b) : static_cast<double>(from_le<float>(b)));
        }
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw ParseError(source, 0, "trailing data after the last plane");
    try
    {
        g.validate();
    }
    catch (const DomainError& e)
    {
        throw ParseError(source, 0, e.what());
    }
    return g;
}

GBuffer read_gbuffer(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(path.string(), 0, "cannot open file");
    return read_gbuffer(in, path.string());
}

} // namespace lidarsim
