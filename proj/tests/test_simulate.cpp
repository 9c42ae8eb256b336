#include "lidarsim/parallel.hpp"
#include "lidarsim/reference.hpp"
#include "lidarsim/simulate.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace lidarsim;
using testsupport::rel_dev;

namespace
{

SimConfig point_config(double delta_r = 0.5, double r_max = 25.0)
{
    SimConfig c;
    c.delta_r = delta_r;
    c.r_max = r_max;
    return c;
}

} // namespace

TEST(SimConfig, BinConventions)
{
    SimConfig c;
    c.delta_r = 0.1;
    c.r_max = 120.0;
    EXPECT_EQ(c.bin_count(), 1200);
    EXPECT_EQ(c.bin_of(0.0), 0);
    EXPECT_EQ(c.bin_of(0.0999), 0);
    EXPECT_EQ(c.bin_of(0.1), 1);
    EXPECT_EQ(c.bin_of(119.99), 1199);
    EXPECT_EQ(c.bin_of(120.0), -1);
    EXPECT_EQ(c.bin_of(std::numeric_limits<double>::infinity()), -1);
    EXPECT_DOUBLE_EQ(c.bin_center(3), 0.35);
    c.delta_r = 0.0;
    EXPECT_THROW(c.validate(), DomainError);
}

TEST(BeamIteration, MatchesOracleExactly)
{
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 6; ++trial)
    {
        const GBuffer g = testsupport::random_gbuffer(32, 24, 0.1, rng);
        const AngularGrid k = testsupport::random_kernel(9, 0.1, rng);
        for (auto mode : {PixelRangeMode::point, PixelRangeMode::extent})
        {
            SimConfig c = point_config();
            c.range_mode = mode;
            const ScanPattern p = testsupport::pixel_center_pattern(g.projection, 3);
            const EchoSignals s = beam_iteration(g, k, p, c);
            for (std::size_t b = 0; b < p.size(); ++b)
            {
                const auto oracle = reference::oracle_direct(g, k, p.beams[b], c);
                const auto sig = s.signal(b);
                ASSERT_EQ(sig.size(), oracle.size());
                for (std::size_t i = 0; i < oracle.size(); ++i)
                    ASSERT_EQ(sig[i], oracle[i]) << "beam " << b << " bin " << i;
            }
        }
    }
}

TEST(BeamIteration, EnergyIsConserved)
{
    // Summing a beam signal over bins gives the kernel-weighted intensity sum.
    std::mt19937_64 rng(5);
    const GBuffer g = testsupport::random_gbuffer(20, 20, 0.1, rng);
    const AngularGrid k = testsupport::random_kernel(7, 0.1, rng);
    SimConfig c = point_config(0.5, 40.0);
    c.range_mode = PixelRangeMode::extent;
    BeamIntegrator bi(g, k, c);
    std::vector<double> sig(static_cast<std::size_t>(bi.bins()));
    bi.integrate_at(10, 10, sig);
    double total = 0.0;
    for (double x : sig)
        total += x;
    double expected = 0.0;
    for (int n = -k.half_rows(); n <= k.half_rows(); ++n)
        for (int m = -k.half_cols(); m <= k.half_cols(); ++m)
        {
            const std::size_t i = g.index(10 + m, 10 + n);
            if (std::isfinite(g.range[i]))
                expected += g.intensity[i] * k(n + k.half_rows(), m + k.half_cols());
        }
    EXPECT_LT(rel_dev(total, expected), 1e-12);
}

TEST(BeamIteration, LinearInIntensity)
{
    std::mt19937_64 rng(6);
    GBuffer g = testsupport::random_gbuffer(24, 24, 0.1, rng);
    const AngularGrid k = testsupport::random_kernel(7, 0.1, rng);
    const ScanPattern p = testsupport::pixel_center_pattern(g.projection, 4);
    const SimConfig c = point_config();
    const EchoSignals a = beam_iteration(g, k, p, c);
    for (auto& x : g.intensity)
        x *= 4.0;
    const EchoSignals b = beam_iteration(g, k, p, c);
    for (std::size_t i = 0; i < a.data.size(); ++i)
        EXPECT_EQ(b.data[i], 4.0 * a.data[i]);
}

TEST(BeamIteration, AmbientIsKernelWeighted)
{
    std::mt19937_64 rng(12);
    const GBuffer g = testsupport::random_gbuffer(16, 16, 0.1, rng);
    const AngularGrid k = testsupport::random_kernel(5, 0.1, rng);
    const Plane amb = ambient_map(g, k);
    BeamIntegrator bi(g, k, point_config());
    std::vector<double> sig(static_cast<std::size_t>(bi.bins()));
    for (long v : {0L, 7L, 15L})
        for (long u : {0L, 9L, 15L})
            EXPECT_LT(rel_dev(bi.integrate_at(u, v, sig).ambient, amb(static_cast<int>(u), static_cast<int>(v))),
                      1e-13);
}

TEST(DominantEcho, NearestAndStrongest)
{
    SimConfig c = point_config(1.0, 6.0);
    const std::vector<double> sig = {0.0, 0.2, 0.0, 0.9, 0.9, 0.1};
    c.propagation = Propagation::nearest;
    auto d = dominant_echo(sig, c);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->bin, 1);
    c.rho_min = 0.5;
    EXPECT_EQ(dominant_echo(sig, c)->bin, 3);
    c.propagation = Propagation::strongest;
    c.rho_min = 0.0;
    // Ties go to the nearer bin.
    EXPECT_EQ(dominant_echo(sig, c)->bin, 3);
    c.rho_min = 1.0;
    EXPECT_FALSE(dominant_echo(sig, c));
}

TEST(RangeStacking, MatchesBeamIterationAtBeamPixels)
{
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 6; ++trial)
    {
        const GBuffer g = testsupport::random_gbuffer(40, 30, 0.1, rng);
        const AngularGrid k = testsupport::random_kernel(9, 0.1, rng);
        for (auto prop : {Propagation::nearest, Propagation::strongest})
        {
            SimConfig c = point_config();
            c.propagation = prop;
            c.rho_min = trial % 2 ? 1e-4 : 0.0;
            const ScanPattern p = testsupport::pixel_center_pattern(g.projection, 2);
            const EchoSignals s = beam_iteration(g, k, p, c);
            const StackResult st = range_stacking(g, k, c);
            const StackResult serial = reference::range_stacking_serial(g, k, c);
            EXPECT_EQ(st.bin, serial.bin);
            EXPECT_EQ(st.intensity, serial.intensity);
            const auto sampled = sample_beams(st, p, g.projection, c);
            for (std::size_t b = 0; b < p.size(); ++b)
            {
                const auto d = dominant_echo(s.signal(b), c);
                ASSERT_EQ(d.has_value(), sampled[b].valid);
                if (!d)
                    continue;
                EXPECT_EQ(d->bin, sampled[b].bin);
                EXPECT_LT(rel_dev(d->intensity, sampled[b].intensity), 1e-12);
                EXPECT_DOUBLE_EQ(sampled[b].range, c.bin_center(d->bin));
            }
        }
    }
}

TEST(RangeStacking, SliceSkipModesAgree)
{
    std::mt19937_64 rng(31);
    GBuffer g = testsupport::random_gbuffer(48, 32, 0.1, rng);
    // Leave most of the image empty.
    for (std::size_t i = 0; i < g.size(); ++i)
        if (i % 7)
        {
            g.range[i] = std::numeric_limits<double>::infinity();
            g.intensity[i] = 0.0;
        }
    const AngularGrid k = testsupport::random_kernel(7, 0.1, rng);
    SimConfig c = point_config(0.1, 30.0);
    c.rho_min = 1e-3;
    const StackResult none = range_stacking(g, k, c, {SliceSkip::none});
    const StackResult empty = range_stacking(g, k, c, {SliceSkip::empty});
    const StackResult thr = range_stacking(g, k, c, {SliceSkip::threshold});
    EXPECT_EQ(none.slices_processed, none.slices_total);
    EXPECT_LT(empty.slices_processed, none.slices_processed);
    EXPECT_LE(thr.slices_processed, empty.slices_processed);
    EXPECT_EQ(none.bin, empty.bin);
    EXPECT_EQ(none.bin, thr.bin);
    EXPECT_EQ(none.intensity, empty.intensity);
    EXPECT_EQ(none.intensity, thr.intensity);
}

TEST(RangeStacking, HigherRhoMinNeverAddsEchoes)
{
    std::mt19937_64 rng(41);
    const GBuffer g = testsupport::random_gbuffer(32, 32, 0.1, rng);
    const AngularGrid k = testsupport::random_kernel(5, 0.1, rng);
    SimConfig c = point_config();
    std::vector<std::int32_t> prev;
    for (double rho : {0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1})
    {
        c.rho_min = rho;
        const StackResult st = range_stacking(g, k, c);
        if (!prev.empty())
            for (std::size_t i = 0; i < st.bin.size(); ++i)
                if (prev[i] < 0)
                    EXPECT_LT(st.bin[i], 0);
        prev = st.bin;
    }
}

TEST(RangeStacking, NoGhostRanges)
{
    // Point mode only reports bins that hold actual G-buffer ranges.
    std::mt19937_64 rng(55);
    const GBuffer g = testsupport::random_gbuffer(40, 40, 0.1, rng);
    const AngularGrid k = testsupport::random_kernel(9, 0.1, rng);
    const SimConfig c = point_config();
    std::set<int> present;
    for (double r : g.range)
        if (std::isfinite(r))
            present.insert(c.bin_of(r));
    for (auto prop : {Propagation::nearest, Propagation::strongest})
    {
        SimConfig cc = c;
        cc.propagation = prop;
        for (int b : range_stacking(g, k, cc).bin)
            if (b >= 0)
                EXPECT_TRUE(present.count(b)) << b;
    }
}

TEST(RangeStacking, SeparablePathMatchesFull)
{
    std::mt19937_64 rng(61);
    const GBuffer g = testsupport::random_gbuffer(48, 40, 0.1, rng);
    const AngularGrid k = gaussian_kernel(deg2rad(0.25), deg2rad(0.15), 3.0, deg2rad(0.1));
    const auto sep = separate(match_pixel_pitch(k, g.projection), 1e-12);
    ASSERT_TRUE(sep);
    const SimConfig c = point_config();
    const StackResult a = range_stacking(g, match_pixel_pitch(k, g.projection), c);
    const StackResult b = range_stacking(g, *sep, c);
    EXPECT_EQ(a.bin, b.bin);
    for (std::size_t i = 0; i < a.intensity.size(); ++i)
        EXPECT_LT(rel_dev(a.intensity[i], b.intensity[i]), 1e-12);
}

TEST(RangeStacking, RejectsExtentMode)
{
    std::mt19937_64 rng(1);
    const GBuffer g = testsupport::random_gbuffer(8, 8, 0.1, rng);
    SimConfig c = point_config();
    c.range_mode = PixelRangeMode::extent;
    EXPECT_THROW(range_stacking(g, testsupport::random_kernel(3, 0.1, rng), c), DomainError);
}

TEST(Determinism, WorkerCountDoesNotChangeResults)
{
    std::mt19937_64 rng(88);
    const GBuffer g = testsupport::random_gbuffer(48, 48, 0.1, rng);
    const AngularGrid k = testsupport::random_kernel(9, 0.1, rng);
    const ScanPattern p = testsupport::pixel_center_pattern(g.projection, 3);
    SimConfig c = point_config();
    std::vector<std::vector<double>> sigs;
    std::vector<std::vector<double>> stacks;
    for (int n : {1, 4, 7})
    {
        ScopedWorkers w(n);
        sigs.push_back(beam_iteration(g, k, p, c).data);
        stacks.push_back(range_stacking(g, k, c).intensity);
    }
    EXPECT_EQ(sigs[0], sigs[1]);
    EXPECT_EQ(sigs[0], sigs[2]);
    EXPECT_EQ(stacks[0], stacks[1]);
    EXPECT_EQ(stacks[0], stacks[2]);
}

TEST(PixelRangeInterval, InclinedPlaneWidth)
{
    // Plane through (0, 0, 10) tilted 45 degrees about the vertical axis.
    Scene s;
    s.materials.push_back({"m", 0.5, 0.0, 0.01});
    const Vec3 n = normalized({1.0, 0.0, -1.0});
    s.primitives.push_back({InfinitePlane{{0, 0, 10}, n}, 0});
    const auto proj = PinholeProjection::centered(33, 33, 400.0);
    const GBuffer g = render_gbuffer(s, proj);
    SimConfig c = point_config(0.01, 50.0);
    c.range_mode = PixelRangeMode::extent;
    const RangeInterval iv = pixel_range_interval(16, 16, g, c);

    // Oracle: exact intersections of the four corner rays with the plane.
    double lo = 1e300, hi = -1e300;
    for (double dx : {0.0, 1.0})
        for (double dy : {0.0, 1.0})
        {
            const Vec3 d = pixel_to_direction({16 + dx, 16 + dy}, proj);
            const double r = dot(Vec3{0, 0, 10}, n) / dot(d, n);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    EXPECT_NEAR(iv.r0, lo, 1e-9);
    EXPECT_NEAR(iv.r1, hi, 1e-9);
    const double w = std::atan(1.0 / proj.focal_px);
    EXPECT_NEAR((iv.r1 - iv.r0) / (10.0 * w), 1.0, 1e-3);
    EXPECT_FALSE(iv.grazing);

    c.range_mode = PixelRangeMode::point;
    const RangeInterval pt = pixel_range_interval(16, 16, g, c);
    EXPECT_EQ(pt.r0, pt.r1);
}

TEST(PixelRangeInterval, GrazingCollapsesToOneBin)
{
    GBuffer g(PinholeProjection::centered(3, 3, 10.0));
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        g.range[i] = 5.0;
        g.normal[i] = {1, 0, 0};
    }
    SimConfig c = point_config(0.2, 10.0);
    c.range_mode = PixelRangeMode::extent;
    const RangeInterval iv = pixel_range_interval(1, 1, g, c);
    EXPECT_TRUE(iv.grazing);
    EXPECT_NEAR(iv.r1 - iv.r0, 0.2, 1e-12);
}

TEST(MatchPixelPitch, ResamplesOnlyWhenNeeded)
{
    const auto proj = PinholeProjection::centered(16, 16, 1.0 / std::tan(deg2rad(0.1)));
    std::mt19937_64 rng(3);
    const AngularGrid k = testsupport::random_kernel(5, 0.1, rng);
    EXPECT_EQ(match_pixel_pitch(k, proj).values, k.values);
    const AngularGrid fine = gaussian_kernel(deg2rad(0.2), deg2rad(0.2), 3.0, deg2rad(0.05));
    const AngularGrid m = match_pixel_pitch(fine, proj);
    EXPECT_NEAR(m.step_deg, 0.1, 1e-12);
    EXPECT_NEAR(m(m.half_rows(), m.half_cols()), 1.0, 1e-12);
}
