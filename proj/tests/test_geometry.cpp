#include "lidarsim/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lidarsim;

TEST(Geometry, OpticalAxisIsCenterPixel)
{
    const auto proj = PinholeProjection::centered(64, 48, 100.0);
    const Vec3 d = pixel_to_direction({32.0, 24.0}, proj);
    EXPECT_NEAR(d.x, 0.0, 1e-15);
    EXPECT_NEAR(d.y, 0.0, 1e-15);
    EXPECT_NEAR(d.z, 1.0, 1e-15);
    const auto s = SphericalAngle::from_direction(d);
    EXPECT_NEAR(s.phi, 0.0, 1e-15);
    EXPECT_NEAR(s.theta, kPi / 2, 1e-15);
}

TEST(Geometry, SphericalConventions)
{
    // +x is positive azimuth, up (-y) is theta 0.
    EXPECT_NEAR(SphericalAngle::from_direction({1, 0, 0}).phi, kPi / 2, 1e-15);
    EXPECT_NEAR(SphericalAngle::from_direction({0, -1, 0}).theta, 0.0, 1e-15);
    const Vec3 d = SphericalAngle{0.3, 1.2}.direction();
    EXPECT_NEAR(d.x, std::sin(1.2) * std::sin(0.3), 1e-15);
    EXPECT_NEAR(d.y, -std::cos(1.2), 1e-15);
    EXPECT_NEAR(d.z, std::sin(1.2) * std::cos(0.3), 1e-15);
}

TEST(Geometry, PixelDirectionRoundTrip)
{
    const auto proj = PinholeProjection::from_hfov(320, 200, deg2rad(60.0));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0.0, 320.0), uy(0.0, 200.0);
    for (int i = 0; i < 1000; ++i)
    {
        const PixelCoord p{ux(rng), uy(rng)};
        const Vec3 d = pixel_to_direction(p, proj);
        EXPECT_NEAR(norm(d), 1.0, 1e-14);
        const PixelCoord q = direction_to_pixel(d, proj);
        EXPECT_NEAR(q.x, p.x, 1e-9);
        EXPECT_NEAR(q.y, p.y, 1e-9);
        const PixelCoord r = direction_to_pixel(SphericalAngle::from_direction(d).direction(), proj);
        EXPECT_NEAR(r.x, p.x, 1e-9);
    }
}

TEST(Geometry, ProjectionErrors)
{
    const auto proj = PinholeProjection::centered(16, 16, 20.0);
    EXPECT_THROW(pixel_to_direction({-1.0, 3.0}, proj), DomainError);
    EXPECT_THROW(direction_to_pixel({0, 0, -1}, proj), DomainError);
    EXPECT_THROW(PinholeProjection::centered(0, 16, 20.0).validate(), DomainError);
    EXPECT_THROW(PinholeProjection::centered(16, 16, -1.0).validate(), DomainError);
}

TEST(Geometry, RoundToPixelIsFloor)
{
    const auto proj = PinholeProjection::centered(8, 8, 10.0);
    long u = 0, v = 0;
    ASSERT_TRUE(round_to_pixel({3.999, 0.0}, proj, u, v));
    EXPECT_EQ(u, 3);
    EXPECT_EQ(v, 0);
    ASSERT_TRUE(round_to_pixel({4.0, 7.5}, proj, u, v));
    EXPECT_EQ(u, 4);
    EXPECT_EQ(v, 7);
    EXPECT_FALSE(round_to_pixel({8.0, 1.0}, proj, u, v));
    EXPECT_FALSE(round_to_pixel({-0.01, 1.0}, proj, u, v));
}

TEST(Geometry, PixelSolidAngleMatchesNumericalIntegral)
{
    const auto proj = PinholeProjection::centered(400, 300, 250.0);
    for (auto [u, v] : {std::pair<long, long>{200, 150}, {0, 0}, {390, 40}})
    {
        // Midpoint rule over the pixel square of f / (x^2 + y^2 + f^2)^(3/2).
        const int n = 200;
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
            {
                const double x = u + (i + 0.5) / n - proj.cx;
                const double y = v + (j + 0.5) / n - proj.cy;
                const double f = proj.focal_px;
                sum += f / std::pow(x * x + y * y + f * f, 1.5);
            }
        const double oracle = sum / (n * n);
        EXPECT_NEAR(pixel_solid_angle(u, v, proj) / oracle, 1.0, 1e-4) << u << "," << v;
    }
}

namespace
{

// Independent decode of the reciprocal depth mapping.
double oracle_depth(double code, const ClipPlanes& c)
{
    const double max = std::ldexp(1.0, c.bit_depth) - 1.0;
    return 1.0 / (1.0 / c.near + code / max * (1.0 / c.far - 1.0 / c.near));
}

} // namespace

TEST(ZBuffer, EncodeDecodeMatchesOracle)
{
    const ClipPlanes c{0.1, 500.0, 16};
    for (double z : {0.1, 0.5, 3.0, 42.0, 499.0, 500.0})
    {
        const DepthCode d = zbuffer_encode(z, c);
        EXPECT_FALSE(d.clipped);
        EXPECT_NEAR(zbuffer_decode(d.code, c), oracle_depth(static_cast<double>(d.code), c), 1e-9 * z);
    }
    EXPECT_EQ(zbuffer_encode(0.1, c).code, 0u);
    EXPECT_EQ(zbuffer_encode(500.0, c).code, c.max_code());
}

TEST(ZBuffer, ClippedFlagOutsidePlanes)
{
    const ClipPlanes c{1.0, 10.0, 24};
    EXPECT_TRUE(zbuffer_encode(0.5, c).clipped);
    EXPECT_TRUE(zbuffer_encode(11.0, c).clipped);
    EXPECT_FALSE(zbuffer_encode(5.0, c).clipped);
    EXPECT_THROW((ClipPlanes{1.0, 10.0, 12}).validate(), DomainError);
    EXPECT_THROW((ClipPlanes{10.0, 1.0, 24}).validate(), DomainError);
}

TEST(ZBuffer, CodesMonotoneAndDecodeIdempotent)
{
    const ClipPlanes c{0.5, 200.0, 16};
    std::uint64_t prev = 0;
    for (double z = 0.5; z <= 200.0; z *= 1.01)
    {
        const auto code = zbuffer_encode(z, c).code;
        EXPECT_GE(code, prev);
        prev = code;
        EXPECT_EQ(zbuffer_encode(zbuffer_decode(code, c), c).code, code);
    }
}

TEST(ZBuffer, ResolutionMatchesBracketingLevels)
{
    const ClipPlanes c{0.1, 1000.0, 24};
    const double max = std::ldexp(1.0, 24) - 1.0;
    for (double z : {1.0, 10.0, 100.0})
    {
        const double cont = (1.0 / z - 1.0 / c.near) / (1.0 / c.far - 1.0 / c.near) * max;
        const double lo = std::floor(cont);
        const double oracle = std::abs(oracle_depth(lo + 1, c) - oracle_depth(lo, c));
        EXPECT_NEAR(zbuffer_resolution(z, c) / oracle, 1.0, 1e-6);
    }
    // Resolution degrades with distance.
    EXPECT_LT(zbuffer_resolution(10.0, c), zbuffer_resolution(100.0, c));
}

TEST(ZBuffer, NearPlaneRatioScalesResolution)
{
    // Roughly linear in 1/near when near << z << far.
    const ClipPlanes a{1e-2, 1e4, 32};
    const ClipPlanes b{1e-3, 1e4, 32};
    const double ratio = zbuffer_resolution(100.0, b) / zbuffer_resolution(100.0, a);
    EXPECT_NEAR(ratio, 10.0, 0.5);
}

TEST(NormalsCorrection, ExactOnPlanes)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> s(-0.3, 0.3);
    for (int i = 0; i < 500; ++i)
    {
        const Vec3 n = normalized({s(rng), s(rng), -1.0});
        const Vec3 p0{s(rng), s(rng), 10.0 + 10.0 * s(rng)};
        const Vec3 pixel = normalized({s(rng), s(rng), 1.0});
        const Vec3 ray = normalized(pixel + Vec3{0.01 * s(rng), 0.01 * s(rng), 0.0});
        const double r_pixel = dot(p0, n) / dot(pixel, n);
        const double r_ray = dot(p0, n) / dot(ray, n);
        const auto c = normals_range_correction(pixel, ray, n, r_pixel);
        EXPECT_FALSE(c.grazing);
        EXPECT_NEAR(c.range, r_ray, 1e-12 * r_ray);
    }
}

TEST(NormalsCorrection, GrazingReturnsRawRange)
{
    const Vec3 n{1, 0, 0};
    const auto c = normals_range_correction({0, 0, 1}, normalized({1e-6, 0, 1}), n, 7.0);
    EXPECT_TRUE(c.grazing);
    EXPECT_EQ(c.range, 7.0);
}

TEST(NormalsCorrection, QuantizedNormals)
{
    const Vec3 n = normalized({0.3, -0.2, -0.9});
    for (int bits : {4, 8, 16})
    {
        const Vec3 q = quantize_normal(n, bits);
        EXPECT_NEAR(norm(q), 1.0, 1e-12);
        EXPECT_LT(norm(q - n), 4.0 / std::ldexp(1.0, bits));
    }
    EXPECT_EQ(quantize_normal(n, 0).x, n.x);
}
