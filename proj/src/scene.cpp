#include "lidarsim/scene.hpp"

#include "lidarsim/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace lidarsim
{

void Material::validate() const
{
    if (!(diffuse_albedo >= 0.0 && diffuse_albedo <= 1.0))
        throw DomainError("material '" + name + "': diffuse albedo must lie in [0, 1]");
    if (!(retro_peak >= 0.0))
        throw DomainError("material '" + name + "': retro peak must be non-negative");
    if (retro_peak > 0.0 && !(retro_sigma > 0.0))
        throw DomainError("material '" + name + "': retro lobe width must be positive");
}

double brdf_eval(const Material& m, const Vec3& to_light, const Vec3& to_viewer, const Vec3& normal)
{
    if (dot(to_light, normal) <= 0.0 || dot(to_viewer, normal) <= 0.0)
        return 0.0;
    double value = m.diffuse_albedo / kPi;
    if (m.retro_peak > 0.0)
    {
        // Chord form; acos loses precision near the retro direction.
        const double alpha = 2.0 * std::asin(std::min(1.0, 0.5 * norm(to_viewer - to_light)));
        value += m.retro_peak * std::exp(-alpha * alpha / (2.0 * m.retro_sigma * m.retro_sigma));
    }
    return value;
}

void Primitive::validate() const
{
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, InfinitePlane>)
            {
                if (std::abs(norm(s.normal) - 1.0) > 1e-9)
                    throw DomainError("plane normal must be unit length");
            }
            else if constexpr (std::is_same_v<T, Sphere>)
            {
                if (!(s.radius > 0.0))
                    throw DomainError("sphere radius must be positive");
            }
            else
            {
                if (s.axis < 0 || s.axis > 2)
                    throw DomainError("quad axis must be 0, 1 or 2");
                if (!(s.lo[0] < s.hi[0] && s.lo[1] < s.hi[1]))
                    throw DomainError("quad extent must satisfy lo < hi");
            }
        },
        shape);
}

void Scene::validate() const
{
    for (const auto& m : materials)
        m.validate();
    for (const auto& p : primitives)
    {
        p.validate();
        if (p.material >= materials.size())
            throw DomainError("primitive references unknown material");
    }
    if (!(sun.irradiance >= 0.0))
        throw DomainError("ambient irradiance must be non-negative");
    if (sun.irradiance > 0.0 && std::abs(norm(sun.direction) - 1.0) > 1e-9)
        throw DomainError("sun direction must be unit length");
}

std::size_t Scene::material_index(const std::string& name) const
{
    for (std::size_t i = 0; i < materials.size(); ++i)
        if (materials[i].name == name)
            return i;
    throw DomainError("unknown material '" + name + "'");
}

namespace
{

double component(const Vec3& v, int axis)
{
    return axis == 0 ? v.x : (axis == 1 ? v.y : v.z);
}

Vec3 axis_vector(int axis)
{
    return {axis == 0 ? 1.0 : 0.0, axis == 1 ? 1.0 : 0.0, axis == 2 ? 1.0 : 0.0};
}

struct Intersection
{
    double t;
    Vec3 normal;
};

std::optional<Intersection> intersect(const InfinitePlane& p, const Vec3& o, const Vec3& d)
{
    const double denom = dot(p.normal, d);
    if (denom == 0.0)
        return std::nullopt;
    const double t = dot(p.point - o, p.normal) / denom;
    if (!(t > 0.0))
        return std::nullopt;
    return Intersection{t, p.normal};
}

std::optional<Intersection> intersect(const Sphere& s, const Vec3& o, const Vec3& d)
{
    const Vec3 oc = o - s.center;
    const double b = dot(oc, d);
    const double c = dot(oc, oc) - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc < 0.0)
        return std::nullopt;
    const double sq = std::sqrt(disc);
    double t = -b - sq;
    if (!(t > 0.0))
        t = -b + sq;
    if (!(t > 0.0))
        return std::nullopt;
    return Intersection{t, (o + d * t - s.center) * (1.0 / s.radius)};
}

std::optional<Intersection> intersect(const AxisAlignedQuad& q, const Vec3& o, const Vec3& d)
{
    const double dn = component(d, q.axis);
    if (dn == 0.0)
        return std::nullopt;
    const double t = (q.offset - component(o, q.axis)) / dn;
    if (!(t > 0.0))
        return std::nullopt;
    const Vec3 p = o + d * t;
    int k = 0;
    for (int a = 0; a < 3; ++a)
    {
        if (a == q.axis)
            continue;
        const double c = component(p, a);
        if (c < q.lo[k] || c > q.hi[k])
            return std::nullopt;
        ++k;
    }
    return Intersection{t, axis_vector(q.axis)};
}

} // namespace

std::optional<Hit> raycast(const Scene& scene, const Vec3& origin, const Vec3& direction)
{
    std::optional<Hit> best;
    for (std::size_t i = 0; i < scene.primitives.size(); ++i)
    {
        const auto& prim = scene.primitives[i];
        const auto hit = std::visit([&](const auto& s) { return intersect(s, origin, direction); }, prim.shape);
        if (!hit || (best && !(hit->t < best->range)))
            continue;
        Vec3 n = hit->normal;
        if (dot(n, direction) > 0.0)
            n = -n;
        best = Hit{hit->t, n, i, prim.material};
    }
    return best;
}

GBuffer::GBuffer(const PinholeProjection& proj)
    : projection(proj)
{
    proj.validate();
    const auto n = static_cast<std::size_t>(proj.width_px) * static_cast<std::size_t>(proj.height_px);
    intensity.assign(n, 0.0);
    range.assign(n, std::numeric_limits<double>::infinity());
    normal.assign(n, Vec3{0, 0, -1});
    ambient.assign(n, 0.0);
}

void GBuffer::validate() const
{
    projection.validate();
    const auto n = static_cast<std::size_t>(projection.width_px) * static_cast<std::size_t>(projection.height_px);
    if (intensity.size() != n || range.size() != n || normal.size() != n || ambient.size() != n)
        throw DomainError("G-buffer planes do not match the projection dimensions");
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!(intensity[i] >= 0.0) || !(ambient[i] >= 0.0))
            throw DomainError("G-buffer intensities must be non-negative");
        if (!(range[i] > 0.0))
            throw DomainError("G-buffer ranges must be positive or +inf");
    }
    if (clip)
        clip->validate();
}

namespace
{

struct PixelSample
{
    double intensity = 0.0;
    double ambient = 0.0;
    double range = std::numeric_limits<double>::infinity();
    Vec3 normal{0, 0, -1};
};

PixelSample shade(const Scene& scene, const Vec3& dir, double solid_angle)
{
    PixelSample out;
    const Vec3 origin{};
    const auto hit = raycast(scene, origin, dir);
    if (!hit)
        return out;
    const Material& m = scene.materials[hit->material];
    const Vec3 to_sensor = -dir;
    const double cos_in = dot(to_sensor, hit->normal);
    out.range = hit->range;
    out.normal = hit->normal;
    out.intensity = brdf_eval(m, to_sensor, to_sensor, hit->normal) * cos_in / (hit->range * hit->range) * solid_angle;

    const Sun& sun = scene.sun;
    if (sun.irradiance > 0.0)
    {
        const double cos_sun = dot(sun.direction, hit->normal);
        if (cos_sun > 0.0)
        {
            bool lit = true;
            if (sun.cast_shadows)
            {
                const Vec3 p = dir * hit->range + hit->normal * (1e-9 * std::max(1.0, hit->range));
                lit = !raycast(scene, p, sun.direction).has_value();
            }
            if (lit)
                out.ambient = brdf_eval(m, sun.direction, to_sensor, hit->normal) * sun.irradiance * cos_sun * solid_angle;
        }
    }
    return out;
}

} // namespace

GBuffer render_gbuffer(const Scene& scene, const PinholeProjection& proj, const RenderOptions& options)
{
    scene.validate();
    if (options.supersample < 1)
        throw DomainError("supersample factor must be at least 1");
    if (options.clip)
        options.clip->validate();

    GBuffer g(proj);
    g.clip = options.clip;
    g.normal_bits = options.normal_bits;
    const int ss = options.supersample;
    const long width = proj.width_px;
    const long height = proj.height_px;

#pragma omp parallel for schedule(dynamic, 4) num_threads(worker_count())
    for (long v = 0; v < height; ++v)
    {
        for (long u = 0; u < width; ++u)
        {
            const double omega = pixel_solid_angle(u, v, proj);
            const Vec3 center_dir = pixel_to_direction({u + 0.5, v + 0.5}, proj);
            PixelSample s = shade(scene, center_dir, omega);
            if (ss > 1)
            {
                double sum_i = 0.0;
                double sum_a = 0.0;
                for (int j = 0; j < ss; ++j)
                    for (int i = 0; i < ss; ++i)
                    {
                        const Vec3 d = pixel_to_direction({u + (i + 0.5) / ss, v + (j + 0.5) / ss}, proj);
                        const PixelSample sub = shade(scene, d, omega);
                        sum_i += sub.intensity;
                        sum_a += sub.ambient;
                    }
                s.intensity = sum_i / (ss * ss);
                s.ambient = sum_a / (ss * ss);
            }

            if (std::isfinite(s.range) && options.clip)
            {
                const double cos_axis = pixel_axis_cosine(u, v, proj);
                const DepthCode code = zbuffer_encode(s.range * cos_axis, *options.clip);
                if (code.clipped)
                    s = PixelSample{};
                else
                    s.range = zbuffer_decode(code.code, *options.clip) / cos_axis;
            }
            if (std::isfinite(s.range) && options.normal_bits > 0)
                s.normal = quantize_normal(s.normal, options.normal_bits);

            const std::size_t k = g.index(u, v);
            g.intensity[k] = s.intensity;
            g.ambient[k] = s.ambient;
            g.range[k] = s.range;
            g.normal[k] = s.normal;
        }
    }
    return g;
}

} // namespace lidarsim
