#pragma once

#include "lidarsim/error.hpp"

#include <cmath>
#include <cstdint>

namespace lidarsim
{

struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v)
{
    const double n = norm(v);
    if (!(n > 0.0))
        throw DomainError("cannot normalize a zero vector");
    return v * (1.0 / n);
}

inline constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

/**
 * Sensor-frame spherical angle.
 *
 * The sensor frame is the camera frame: x right, y down, z along the optical
 * axis. Azimuth phi is measured in the horizontal plane from +z towards +x,
 * theta is the polar angle from the "up" axis (-y), so the optical axis is
 * (phi, theta) = (0, pi/2).
 */
struct SphericalAngle
{
    double phi = 0.0;
    double theta = kPi / 2;

    Vec3 direction() const;
    static SphericalAngle from_direction(const Vec3& v);
};

/// Continuous pixel coordinates. Pixel (u, v) covers [u, u+1) x [v, v+1);
/// its center is at (u + 0.5, v + 0.5).
struct PixelCoord
{
    double x = 0.0;
    double y = 0.0;
};

struct PinholeProjection
{
    int width_px = 0;
    int height_px = 0;
    double focal_px = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    /// Principal point at the image center.
    static PinholeProjection centered(int width, int height, double focal_px);
    /// Focal length chosen so the horizontal field of view spans `hfov_rad`.
    static PinholeProjection from_hfov(int width, int height, double hfov_rad);

    void validate() const;
    bool contains(const PixelCoord& p) const;
    bool contains_pixel(long u, long v) const
    {
        return u >= 0 && v >= 0 && u < width_px && v < height_px;
    }
    /// Angular pitch of one pixel at the principal point (radians).
    double center_pitch() const { return std::atan(1.0 / focal_px); }
    bool operator==(const PinholeProjection&) const = default;
};

struct ClipPlanes
{
    double near = 0.1;
    double far = 1000.0;
    int bit_depth = 24;

    void validate() const;
    std::uint64_t max_code() const;
    bool operator==(const ClipPlanes&) const = default;
};

Vec3 pixel_to_direction(const PixelCoord& p, const PinholeProjection& proj);
PixelCoord direction_to_pixel(const Vec3& v, const PinholeProjection& proj);

/// Integer pixel that contains the continuous coordinate, or false if outside.
bool round_to_pixel(const PixelCoord& p, const PinholeProjection& proj, long& u, long& v);

/// Solid angle of pixel (u, v) in steradians, cos^3 small-angle form.
double pixel_solid_angle(long u, long v, const PinholeProjection& proj);

/// Cosine of the angle between the optical axis and the ray through a pixel center.
double pixel_axis_cosine(long u, long v, const PinholeProjection& proj);

struct DepthCode
{
    std::uint64_t code = 0;
    bool clipped = false;
};

DepthCode zbuffer_encode(double z, const ClipPlanes& clip);
double zbuffer_decode(std::uint64_t code, const ClipPlanes& clip);

/// Spacing between the two decodable depths that bracket z.
double zbuffer_resolution(double z, const ClipPlanes& clip);

/// Linearized local quantization step z^2 (1/near - 1/far) 2^-bits.
double zbuffer_step_estimate(double z, const ClipPlanes& clip);

inline constexpr double kParallelEpsilon = 1e-4;

struct CorrectedRange
{
    double range = 0.0;
    bool grazing = false;
};

/**
 * Extrapolate the range read at a pixel center to the true ray direction,
 * assuming the surface is locally planar: r_corr = (p.n) / (v.n) * r.
 *
 * Returns the raw range with `grazing` set when |v.n| < kParallelEpsilon.
 */
CorrectedRange normals_range_correction(const Vec3& pixel_dir, const Vec3& ray_dir,
                                        const Vec3& normal, double range);

/// Quantize each normal component to `bits` over [-1, 1] and renormalize.
Vec3 quantize_normal(const Vec3& n, int bits);

} // namespace lidarsim
