#pragma once

// Shared helpers for the YAML scene and run config readers.

#include "lidarsim/error.hpp"
#include "lidarsim/geometry.hpp"

#include <yaml-cpp/yaml.h>

#include <string>

namespace lidarsim::detail
{

class Reader
{
public:
    explicit Reader(std::string source)
        : source_(std::move(source))
    {
    }

    [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const
    {
        const auto mark = node.Mark();
        throw ParseError(source_, mark.is_null() ? 0 : static_cast<std::size_t>(mark.line + 1), what);
    }

    double number(const YAML::Node& node, const std::string& key) const
    {
        try
        {
            return node.as<double>();
        }
        catch (const YAML::Exception&)
        {
            fail(node, "'" + key + "' must be a number");
        }
    }

    int integer(const YAML::Node& node, const std::string& key) const
    {
        try
        {
            return node.as<int>();
        }
        catch (const YAML::Exception&)
        {
            fail(node, "'" + key + "' must be an integer");
        }
    }

    Vec3 vec3(const YAML::Node& node, const std::string& key) const
    {
        if (!node.IsSequence() || node.size() != 3)
            fail(node, "'" + key + "' must be a list of three numbers");
        return {number(node[0], key), number(node[1], key), number(node[2], key)};
    }

    const YAML::Node require(const YAML::Node& map, const std::string& key) const
    {
        const YAML::Node n = map[key];
        if (!n)
            fail(map, "missing key '" + key + "'");
        return n;
    }

    double number_or(const YAML::Node& map, const std::string& key, double fallback) const
    {
        const YAML::Node n = map[key];
        return n ? number(n, key) : fallback;
    }

private:
    std::string source_;
};

inline PinholeProjection read_projection(const Reader& r, const YAML::Node& p)
{
    const int w = r.integer(r.require(p, "width"), "width");
    const int h = r.integer(r.require(p, "height"), "height");
    PinholeProjection proj;
    if (p["focal_px"])
        proj = PinholeProjection{w, h, r.number(p["focal_px"], "focal_px"), 0.5 * w, 0.5 * h};
    else if (p["hfov_deg"])
        proj = PinholeProjection::from_hfov(w, h, deg2rad(r.number(p["hfov_deg"], "hfov_deg")));
    else
        r.fail(p, "projection needs 'focal_px' or 'hfov_deg'");
    proj.cx = r.number_or(p, "cx", proj.cx);
    proj.cy = r.number_or(p, "cy", proj.cy);
    try
    {
        proj.validate();
    }
    catch (const DomainError& e)
    {
        r.fail(p, e.what());
    }
    return proj;
}

inline ClipPlanes read_clip(const Reader& r, const YAML::Node& c)
{
    ClipPlanes clip;
    clip.near = r.number(r.require(c, "near"), "near");
    clip.far = r.number(r.require(c, "far"), "far");
    clip.bit_depth = c["bits"] ? r.integer(c["bits"], "bits") : 24;
    try
    {
        clip.validate();
    }
    catch (const DomainError& e)
    {
        r.fail(c, e.what());
    }
    return clip;
}

} // namespace lidarsim::detail
