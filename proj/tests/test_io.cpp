#include "lidarsim/gbuffer_io.hpp"
#include "lidarsim/plot.hpp"
#include "lidarsim/pointcloud.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace lidarsim;

namespace
{

GBuffer float_exact_gbuffer()
{
    std::mt19937_64 rng(17);
    GBuffer g = testsupport::random_gbuffer(12, 7, 0.2, rng);
    // Values representable as float survive the 32-bit container unchanged.
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        g.intensity[i] = static_cast<float>(g.intensity[i]);
        g.ambient[i] = static_cast<float>(g.ambient[i]);
        if (std::isfinite(g.range[i]))
            g.range[i] = static_cast<float>(g.range[i]);
        g.normal[i] = {0.0, 0.0, -1.0};
    }
    return g;
}

PointCloud sample_cloud()
{
    PointCloud c;
    c.records.push_back({0, -1.5, 90.25, 10.0, -0.26, 0.0, 9.99, 3e-7, 0.35, 0});
    c.records.push_back({7, 2.0 / 3.0, 89.0, 20.5, 0.24, -0.36, 20.49, 1e-9, 0.1, 1});
    c.metadata = {{"config_hash", "0123456789abcdef"}, {"algorithm", "beam-iteration"}};
    return c;
}

} // namespace

TEST(GBufferIo, RoundTrip)
{
    GBuffer g = float_exact_gbuffer();
    g.clip = ClipPlanes{0.5, 300.0, 24};
    g.normal_bits = 8;
    std::stringstream ss;
    write_gbuffer(g, ss);
    const GBuffer r = read_gbuffer(ss, "mem");
    EXPECT_EQ(r.projection, g.projection);
    ASSERT_TRUE(r.clip);
    EXPECT_EQ(*r.clip, *g.clip);
    EXPECT_EQ(r.normal_bits, 8);
    EXPECT_EQ(r.intensity, g.intensity);
    EXPECT_EQ(r.range, g.range);
    EXPECT_EQ(r.ambient, g.ambient);
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_EQ(r.normal[i].z, g.normal[i].z);
}

TEST(GBufferIo, DoubleRangesWithoutClip)
{
    std::mt19937_64 rng(2);
    GBuffer g = testsupport::random_gbuffer(5, 4, 0.2, rng);
    std::stringstream ss;
    write_gbuffer(g, ss, RangePrecision::f64);
    EXPECT_EQ(read_gbuffer(ss, "mem").range, g.range);
    g.clip = ClipPlanes{};
    std::stringstream ss2;
    EXPECT_THROW(write_gbuffer(g, ss2, RangePrecision::f64), DomainError);
}

TEST(GBufferIo, ErrorsNameTheProblem)
{
    const GBuffer g = float_exact_gbuffer();
    std::stringstream ss;
    write_gbuffer(g, ss);
    const std::string full = ss.str();

    auto message = [](const std::string& bytes) -> std::string {
        std::istringstream in(bytes);
        try
        {
            read_gbuffer(in, "g.bin");
        }
        catch (const ParseError& e)
        {
            return e.what();
        }
        return "";
    };
    EXPECT_NE(message(full.substr(0, full.size() - 10)).find("plane 'ambient' is truncated"), std::string::npos);
    EXPECT_NE(message(full + "x").find("trailing"), std::string::npos);
    std::string unknown = full;
    unknown.replace(unknown.find("normal_x"), 8, "normal_w");
    EXPECT_NE(message(unknown).find("unknown plane 'normal_w'"), std::string::npos);
    EXPECT_NE(message("hello\n").find("not a G-buffer"), std::string::npos);
}

TEST(PointCloudIo, CsvRoundTripIsExact)
{
    const PointCloud c = sample_cloud();
    std::stringstream ss;
    write_csv(c, ss);
    EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), kCsvHeader);
    const PointCloud r = read_csv(ss, "mem");
    ASSERT_EQ(r.records.size(), 2u);
    EXPECT_EQ(r.records[0], c.records[0]);
    EXPECT_EQ(r.records[1], c.records[1]);
}

TEST(PointCloudIo, CsvErrors)
{
    std::istringstream bad_header("x,y,z\n");
    EXPECT_THROW(read_csv(bad_header, "c"), ParseError);
    std::istringstream short_row(std::string(kCsvHeader) + "\n1,2,3\n");
    try
    {
        read_csv(short_row, "c");
        FAIL();
    }
    catch (const ParseError& e)
    {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(PointCloudIo, PlyLayout)
{
    std::stringstream ss;
    write_ply(sample_cloud(), ss);
    const std::string s = ss.str();
    EXPECT_EQ(s.rfind("ply\nformat ascii 1.0\n", 0), 0u);
    EXPECT_NE(s.find("comment config_hash 0123456789abcdef\n"), std::string::npos);
    EXPECT_NE(s.find("element vertex 2\n"), std::string::npos);
    EXPECT_NE(s.find("property double epw\nend_header\n"), std::string::npos);
    std::stringstream again;
    write_ply(sample_cloud(), again);
    EXPECT_EQ(again.str(), s);
}

TEST(PointCloud, EchoRangeIsIntervalMidpoint)
{
    Echo e;
    e.r0 = 10.0;
    e.r1 = 10.5;
    e.epw = 0.5;
    e.peak = 2.0;
    EXPECT_DOUBLE_EQ(echo_range(e), 10.25);
    ScanPattern p;
    p.beams.push_back({4, {0.0, kPi / 2}});
    const PointCloud c = to_points(p, {{e}});
    ASSERT_EQ(c.records.size(), 1u);
    EXPECT_DOUBLE_EQ(c.records[0].z, 10.25);
    EXPECT_DOUBLE_EQ(c.records[0].theta_deg, 90.0);
    EXPECT_EQ(c.records[0].beam_id, 4);
    EXPECT_EQ(c.records[0].epw, 0.5);
    EXPECT_EQ(c.records[0].intensity, 2.0);
}

TEST(Hash, Fnv1aKnownValues)
{
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Plot, BevViewportMapping)
{
    PointCloud c;
    c.records.push_back({0, 0, 90, 10, 0, 0, 10, 1, 0.1, 0});
    c.records.push_back({1, 0, 90, 20, 2, 0, 20, 1, 0.2, 0});
    // Data 2 x 10 into a 720 x 520 plot area: scale 52, centered horizontally.
    const Viewport vp(c, PlotView::bev);
    const CanvasPoint a = vp.map(c.records[0]);
    const CanvasPoint b = vp.map(c.records[1]);
    EXPECT_NEAR(a.x, 348.0, 1e-9);
    EXPECT_NEAR(a.y, 560.0, 1e-9);
    EXPECT_NEAR(b.x, 452.0, 1e-9);
    EXPECT_NEAR(b.y, 40.0, 1e-9);
}

TEST(Plot, SvgIsDeterministic)
{
    const PointCloud c = sample_cloud();
    const std::string a = plot_svg(c, PlotView::front, ColorBy::epw);
    EXPECT_EQ(a, plot_svg(c, PlotView::front, ColorBy::epw));
    EXPECT_EQ(a.rfind("<svg", 0), 0u);
    EXPECT_NE(a.find("<circle"), std::string::npos);
    // Empty clouds still render.
    EXPECT_NE(plot_svg(PointCloud{}, PlotView::bev, ColorBy::range).find("</svg>"), std::string::npos);
}
