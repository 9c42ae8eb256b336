#include "lidarsim/geometry.hpp"

#include <algorithm>
#include <string>

namespace lidarsim
{

Vec3 SphericalAngle::direction() const
{
    const double s = std::sin(theta);
    return {s * std::sin(phi), -std::cos(theta), s * std::cos(phi)};
}

SphericalAngle SphericalAngle::from_direction(const Vec3& v)
{
    const Vec3 d = normalized(v);
    return {std::atan2(d.x, d.z), std::acos(std::clamp(-d.y, -1.0, 1.0))};
}

PinholeProjection PinholeProjection::centered(int width, int height, double focal_px)
{
    PinholeProjection p{width, height, focal_px, 0.5 * width, 0.5 * height};
    p.validate();
    return p;
}

PinholeProjection PinholeProjection::from_hfov(int width, int height, double hfov_rad)
{
    if (!(hfov_rad > 0.0 && hfov_rad < kPi))
        throw DomainError("horizontal field of view must lie in (0, pi)");
    return centered(width, height, 0.5 * width / std::tan(0.5 * hfov_rad));
}

void PinholeProjection::validate() const
{
    if (width_px <= 0 || height_px <= 0)
        throw DomainError("projection dimensions must be positive");
    if (!(focal_px > 0.0) || !std::isfinite(focal_px))
        throw DomainError("focal length must be positive");
    if (!(cx >= 0.0 && cx <= width_px && cy >= 0.0 && cy <= height_px))
        throw DomainError("principal point must lie inside the image");
}

bool PinholeProjection::contains(const PixelCoord& p) const
{
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= width_px && p.y <= height_px;
}

void ClipPlanes::validate() const
{
    if (!(near > 0.0 && far > near))
        throw DomainError("clip planes require 0 < near < far");
    if (bit_depth != 16 && bit_depth != 24 && bit_depth != 32)
        throw DomainError("z-buffer bit depth must be 16, 24 or 32");
}

std::uint64_t ClipPlanes::max_code() const
{
    return (std::uint64_t{1} << bit_depth) - 1;
}

Vec3 pixel_to_direction(const PixelCoord& p, const PinholeProjection& proj)
{
    if (!proj.contains(p))
        throw DomainError("pixel (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                          ") outside image");
    return normalized({(p.x - proj.cx) / proj.focal_px, (p.y - proj.cy) / proj.focal_px, 1.0});
}

PixelCoord direction_to_pixel(const Vec3& v, const PinholeProjection& proj)
{
    if (!(v.z > 0.0))
        throw DomainError("direction does not point through the image plane");
    return {proj.cx + proj.focal_px * v.x / v.z, proj.cy + proj.focal_px * v.y / v.z};
}

bool round_to_pixel(const PixelCoord& p, const PinholeProjection& proj, long& u, long& v)
{
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
        return false;
    const double fx = std::floor(p.x);
    const double fy = std::floor(p.y);
    if (fx < 0.0 || fy < 0.0 || fx >= proj.width_px || fy >= proj.height_px)
        return false;
    u = static_cast<long>(fx);
    v = static_cast<long>(fy);
    return true;
}

double pixel_axis_cosine(long u, long v, const PinholeProjection& proj)
{
    const double dx = (u + 0.5 - proj.cx) / proj.focal_px;
    const double dy = (v + 0.5 - proj.cy) / proj.focal_px;
    return 1.0 / std::sqrt(1.0 + dx * dx + dy * dy);
}

double pixel_solid_angle(long u, long v, const PinholeProjection& proj)
{
    if (!proj.contains_pixel(u, v))
        throw DomainError("pixel outside image");
    const double c = pixel_axis_cosine(u, v, proj);
    return c * c * c / (proj.focal_px * proj.focal_px);
}

namespace
{

double normalized_depth(double z, const ClipPlanes& clip)
{
    return (1.0 / z - 1.0 / clip.near) / (1.0 / clip.far - 1.0 / clip.near);
}

} // namespace

DepthCode zbuffer_encode(double z, const ClipPlanes& clip)
{
    clip.validate();
    DepthCode out;
    if (!(z >= clip.near && z <= clip.far))
    {
        out.clipped = true;
        out.code = z < clip.near ? 0 : clip.max_code();
        return out;
    }
    const double scaled = normalized_depth(z, clip) * static_cast<double>(clip.max_code());
    const double rounded = std::clamp(std::round(scaled), 0.0, static_cast<double>(clip.max_code()));
    out.code = static_cast<std::uint64_t>(rounded);
    return out;
}

double zbuffer_decode(std::uint64_t code, const ClipPlanes& clip)
{
    clip.validate();
    if (code >= clip.max_code())
        return clip.far;
    if (code == 0)
        return clip.near;
    const double d = static_cast<double>(code) / static_cast<double>(clip.max_code());
    return 1.0 / (1.0 / clip.near + d * (1.0 / clip.far - 1.0 / clip.near));
}

double zbuffer_resolution(double z, const ClipPlanes& clip)
{
    clip.validate();
    const double zc = std::clamp(z, clip.near, clip.far);
    const double scaled = normalized_depth(zc, clip) * static_cast<double>(clip.max_code());
    auto lo = static_cast<std::uint64_t>(std::clamp(std::floor(scaled), 0.0,
                                                    static_cast<double>(clip.max_code())));
    if (lo == clip.max_code())
        --lo;
    return zbuffer_decode(lo + 1, clip) - zbuffer_decode(lo, clip);
}

double zbuffer_step_estimate(double z, const ClipPlanes& clip)
{
    return z * z * (1.0 / clip.near - 1.0 / clip.far) * std::ldexp(1.0, -clip.bit_depth);
}

CorrectedRange normals_range_correction(const Vec3& pixel_dir, const Vec3& ray_dir,
                                        const Vec3& normal, double range)
{
    const double vn = dot(ray_dir, normal);
    if (std::abs(vn) < kParallelEpsilon)
        return {range, true};
    const double corrected = dot(pixel_dir, normal) / vn * range;
    if (!(corrected > 0.0))
        return {range, true};
    return {corrected, false};
}

Vec3 quantize_normal(const Vec3& n, int bits)
{
    if (bits <= 0)
        return n;
    if (bits > 30)
        throw DomainError("normal quantization supports at most 30 bits");
    const double levels = std::ldexp(1.0, bits) - 1.0;
    auto q = [levels](double c) {
        const double code = std::round((std::clamp(c, -1.0, 1.0) + 1.0) * 0.5 * levels);
        return code / levels * 2.0 - 1.0;
    };
    return normalized({q(n.x), q(n.y), q(n.z)});
}

} // namespace lidarsim
