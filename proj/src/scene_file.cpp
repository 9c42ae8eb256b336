#include "lidarsim/scene_file.hpp"

#include "yaml_reader.hpp"

#include <fstream>
#include <sstream>

namespace lidarsim
{

using detail::read_clip;
using detail::read_projection;
using detail::Reader;

namespace
{

int axis_from_name(const Reader& r, const YAML::Node& node)
{
    const auto s = node.as<std::string>();
    if (s == "x")
        return 0;
    if (s == "y")
        return 1;
    if (s == "z")
        return 2;
    r.fail(node, "quad axis must be one of x, y, z");
}

} // namespace

SceneFile parse_scene(const std::string& text, const std::string& source)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (const YAML::ParserException& e)
    {
        throw ParseError(source, static_cast<std::size_t>(e.mark.line + 1), e.msg);
    }
    const Reader r(source);
    if (!root.IsMap())
        throw ParseError(source, 0, "scene file must be a mapping");

    SceneFile out;
    if (const auto v = root["format_version"]; v && r.integer(v, "format_version") != 1)
        r.fail(v, "unsupported format_version");

    if (const auto p = root["projection"])
    {
        out.projection = read_projection(r, p);
    }

    if (const auto c = root["clip"])
    {
        out.render.clip = read_clip(r, c);
    }

    if (const auto rd = root["render"])
    {
        if (rd["normal_bits"])
            out.render.normal_bits = r.integer(rd["normal_bits"], "normal_bits");
        if (rd["supersample"])
            out.render.supersample = r.integer(rd["supersample"], "supersample");
    }

    Scene& scene = out.scene;
    if (const auto mats = root["materials"])
    {
        if (!mats.IsSequence())
            r.fail(mats, "'materials' must be a list");
        for (const auto& m : mats)
        {
            Material mat;
            mat.name = r.require(m, "name").as<std::string>();
            mat.diffuse_albedo = r.number_or(m, "albedo", mat.diffuse_albedo);
            mat.retro_peak = r.number_or(m, "retro_peak", 0.0);
            mat.retro_sigma = deg2rad(r.number_or(m, "retro_sigma_deg", rad2deg(mat.retro_sigma)));
            for (const auto& existing : scene.materials)
                if (existing.name == mat.name)
                    r.fail(m, "duplicate material '" + mat.name + "'");
            try
            {
                mat.validate();
            }
            catch (const DomainError& e)
            {
                r.fail(m, e.what());
            }
            scene.materials.push_back(mat);
        }
    }

    if (const auto sun = root["sun"])
    {
        scene.sun.direction = normalized(r.vec3(r.require(sun, "direction"), "direction"));
        scene.sun.irradiance = r.number_or(sun, "irradiance", 0.0);
        if (sun["shadows"])
            scene.sun.cast_shadows = sun["shadows"].as<bool>();
    }

    if (const auto prims = root["primitives"])
    {
        if (!prims.IsSequence())
            r.fail(prims, "'primitives' must be a list");
        for (const auto& p : prims)
        {
            Primitive prim;
            const auto type = r.require(p, "type").as<std::string>();
            if (type == "plane")
                prim.shape = InfinitePlane{r.vec3(r.require(p, "point"), "point"),
                                           normalized(r.vec3(r.require(p, "normal"), "normal"))};
            else if (type == "sphere")
                prim.shape = Sphere{r.vec3(r.require(p, "center"), "center"),
                                    r.number(r.require(p, "radius"), "radius")};
            else if (type == "quad")
            {
                AxisAlignedQuad q;
                q.axis = axis_from_name(r, r.require(p, "axis"));
                q.offset = r.number(r.require(p, "offset"), "offset");
                const auto lo = r.require(p, "min");
                const auto hi = r.require(p, "max");
                if (!lo.IsSequence() || lo.size() != 2 || !hi.IsSequence() || hi.size() != 2)
                    r.fail(p, "quad 'min'/'max' must be lists of two numbers");
                for (int i = 0; i < 2; ++i)
                {
                    q.lo[i] = r.number(lo[i], "min");
                    q.hi[i] = r.number(hi[i], "max");
                }
                prim.shape = q;
            }
            else
                r.fail(p, "unknown primitive type '" + type + "'");

            try
            {
                prim.material = scene.material_index(r.require(p, "material").as<std::string>());
                prim.validate();
            }
            catch (const DomainError& e)
            {
                r.fail(p, e.what());
            }
            scene.primitives.push_back(prim);
        }
    }

    try
    {
        scene.validate();
    }
    catch (const DomainError& e)
    {
        throw ParseError(source, 0, e.what());
    }
    return out;
}

SceneFile load_scene(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(path.string(), 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str(), path.string());
}

} // namespace lidarsim
