#pragma once

#include "lidarsim/geometry.hpp"

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lidarsim
{

/// Diffuse + retroreflective BRDF parameters.
struct Material
{
    std::string name;
    double diffuse_albedo = 0.5;
    /// BRDF value (1/sr) of the retro lobe at the exact retro direction.
    double retro_peak = 0.0;
    /// Gaussian angular width of the retro lobe (radians).
    double retro_sigma = deg2rad(0.5);

    void validate() const;
};

/**
 * Evaluates f_r for light arriving from `to_light` and leaving towards
 * `to_viewer`. All vectors are unit length and point away from the surface.
 *
 *   f_r = albedo / pi + retro_peak * exp(-alpha^2 / (2 sigma^2))
 *
 * where alpha is the angle between `to_viewer` and the retro direction
 * `to_light`. Directions below the surface give 0.
 */
double brdf_eval(const Material& m, const Vec3& to_light, const Vec3& to_viewer, const Vec3& normal);

struct InfinitePlane
{
    Vec3 point;
    Vec3 normal{0, 0, -1};
};

struct Sphere
{
    Vec3 center;
    double radius = 1.0;
};

/// Rectangle perpendicular to a coordinate axis (0 = x, 1 = y, 2 = z) at `offset`,
/// spanning [lo, hi] in the two remaining axes (in x, y, z order).
struct AxisAlignedQuad
{
    int axis = 2;
    double offset = 0.0;
    double lo[2] = {0.0, 0.0};
    double hi[2] = {0.0, 0.0};
};

using Shape = std::variant<InfinitePlane, Sphere, AxisAlignedQuad>;

struct Primitive
{
    Shape shape;
    std::size_t material = 0;

    void validate() const;
};

struct Sun
{
    /// Unit vector pointing from the scene towards the ambient source.
    Vec3 direction{0, -1, 0};
    double irradiance = 0.0;
    bool cast_shadows = true;
};

struct Scene
{
    std::vector<Material> materials;
    std::vector<Primitive> primitives;
    Sun sun;

    void validate() const;
    std::size_t material_index(const std::string& name) const;
};

struct Hit
{
    double range = std::numeric_limits<double>::infinity();
    /// Unit normal facing the incoming ray.
    Vec3 normal;
    std::size_t primitive = 0;
    std::size_t material = 0;
};

/// Nearest positive-range hit; ties keep the first-listed primitive.
std::optional<Hit> raycast(const Scene& scene, const Vec3& origin, const Vec3& direction);

/// Aligned per-pixel planes in row-major order (index = v * width + u).
struct GBuffer
{
    PinholeProjection projection;
    std::optional<ClipPlanes> clip;
    /// Bits per normal component when normals were quantized, 0 otherwise.
    int normal_bits = 0;

    std::vector<double> intensity;
    std::vector<double> range;
    std::vector<Vec3> normal;
    std::vector<double> ambient;

    GBuffer() = default;
    explicit GBuffer(const PinholeProjection& proj);

    int width() const { return projection.width_px; }
    int height() const { return projection.height_px; }
    std::size_t size() const { return intensity.size(); }
    std::size_t index(long u, long v) const
    {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(width()) + static_cast<std::size_t>(u);
    }
    /// Throws if plane sizes disagree or values violate plane invariants.
    void validate() const;
};

struct RenderOptions
{
    /// N x N center-jittered sub-rays per pixel, averaged; 1 = center ray only.
    int supersample = 1;
    /// Quantize normals to this many bits per component (0 = exact).
    int normal_bits = 0;
    /// Quantize depth through a z-buffer with these planes.
    std::optional<ClipPlanes> clip;
};

GBuffer render_gbuffer(const Scene& scene, const PinholeProjection& proj, const RenderOptions& options = {});

} // namespace lidarsim
