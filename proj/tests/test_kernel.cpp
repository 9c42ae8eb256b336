#include "lidarsim/kernel.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace lidarsim;

namespace
{

// Singular values of a small matrix via cyclic Jacobi on A^T A.
std::vector<double> singular_values(const std::vector<double>& a, int rows, int cols)
{
    std::vector<double> m(static_cast<std::size_t>(cols) * cols, 0.0);
    for (int i = 0; i < cols; ++i)
        for (int j = 0; j < cols; ++j)
            for (int r = 0; r < rows; ++r)
                m[i * cols + j] += a[r * cols + i] * a[r * cols + j];
    for (int sweep = 0; sweep < 100; ++sweep)
    {
        double off = 0.0;
        for (int p = 0; p < cols; ++p)
            for (int q = p + 1; q < cols; ++q)
                off += m[p * cols + q] * m[p * cols + q];
        if (off < 1e-30)
            break;
        for (int p = 0; p < cols; ++p)
            for (int q = p + 1; q < cols; ++q)
            {
                const double apq = m[p * cols + q];
                if (std::abs(apq) < 1e-300)
                    continue;
                const double theta = 0.5 * (m[q * cols + q] - m[p * cols + p]) / apq;
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < cols; ++k)
                {
                    const double mkp = m[k * cols + p];
                    const double mkq = m[k * cols + q];
                    m[k * cols + p] = c * mkp - s * mkq;
                    m[k * cols + q] = s * mkp + c * mkq;
                }
                for (int k = 0; k < cols; ++k)
                {
                    const double mpk = m[p * cols + k];
                    const double mqk = m[q * cols + k];
                    m[p * cols + k] = c * mpk - s * mqk;
                    m[q * cols + k] = s * mpk + c * mqk;
                }
            }
    }
    std::vector<double> sv;
    for (int i = 0; i < cols; ++i)
        sv.push_back(std::sqrt(std::max(0.0, m[i * cols + i])));
    std::sort(sv.rbegin(), sv.rend());
    return sv;
}

} // namespace

TEST(Kernel, GaussianValues)
{
    const double step = deg2rad(0.1);
    const AngularGrid k = gaussian_kernel(deg2rad(0.3), deg2rad(0.2), 3.0, step);
    EXPECT_EQ(k.cols, 2 * 9 + 1);
    EXPECT_EQ(k.rows, 2 * 6 + 1);
    EXPECT_EQ(k.normalization, Normalization::peak);
    EXPECT_DOUBLE_EQ(k(k.half_rows(), k.half_cols()), 1.0);
    // One horizontal step: exp(-(0.1/0.3)^2 / 2).
    EXPECT_NEAR(k(k.half_rows(), k.half_cols() + 1), std::exp(-0.5 / 9.0), 1e-12);
    EXPECT_NEAR(k(k.half_rows() + 2, k.half_cols()), std::exp(-0.5), 1e-12);
    EXPECT_NEAR(k.step_deg, 0.1, 1e-12);
}

TEST(Kernel, CompositeTailAmplitude)
{
    const double step = deg2rad(0.05);
    const AngularGrid k = composite_gaussian(deg2rad(0.25), deg2rad(1.0), 1e-4, 3.5, step);
    const int c = k.half_cols();
    EXPECT_DOUBLE_EQ(k(c, c), 1.0);
    // 3 degrees out the core has vanished and the tail is amp * exp(-9/2) / (1 + amp).
    const double expected = 1e-4 * std::exp(-4.5) / (1.0 + 1e-4);
    EXPECT_NEAR(k(c, c + 60) / expected, 1.0, 1e-9);
    EXPECT_GE(k(c, c + 60), 1e-6);
}

TEST(Kernel, SizeCapIsEnforced)
{
    EXPECT_THROW(gaussian_kernel(1.0, 1.0, 10.0, 1e-5), DomainError);
    EXPECT_THROW(gaussian_kernel(-1.0, 1.0, 3.0, 0.01), DomainError);
}

TEST(Kernel, ValidateRejectsEvenAndNegative)
{
    AngularGrid k = AngularGrid::zeros(3, 3, 0.1);
    k.values[4] = 1.0;
    EXPECT_NO_THROW(k.validate());
    k.values[0] = -0.1;
    EXPECT_THROW(k.validate(), DomainError);
    AngularGrid even;
    even.rows = 2;
    even.cols = 3;
    even.values.assign(6, 0.0);
    EXPECT_THROW(even.validate(), DomainError);
}

TEST(Kernel, CombineIsElementwise)
{
    std::mt19937_64 rng(5);
    AngularGrid e = AngularGrid::zeros(5, 7, 0.1);
    AngularGrid c = AngularGrid::zeros(5, 7, 0.1);
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t i = 0; i < e.values.size(); ++i)
    {
        e.values[i] = u(rng);
        c.values[i] = u(rng);
    }
    const AngularGrid ce = combine(e, c);
    for (std::size_t i = 0; i < ce.values.size(); ++i)
        EXPECT_EQ(ce.values[i], e.values[i] * c.values[i]);

    const AngularGrid other = AngularGrid::zeros(5, 7, 0.05);
    EXPECT_THROW(combine(e, other), DomainError);
    EXPECT_NO_THROW(combine(e, other, ResamplePolicy::bilinear));
}

TEST(Kernel, ResampleSameStepIsIdentity)
{
    std::mt19937_64 rng(2);
    const AngularGrid k = testsupport::random_kernel(9, 0.1, rng);
    const AngularGrid r = resample(k, 0.1, k.half_rows(), k.half_cols());
    for (std::size_t i = 0; i < k.values.size(); ++i)
        EXPECT_NEAR(r.values[i], k.values[i], 1e-15);
}

TEST(Kernel, ResampleLinearFieldIsExact)
{
    // Bilinear interpolation reproduces bilinear fields.
    AngularGrid k = AngularGrid::zeros(11, 11, 0.1);
    for (int r = 0; r < 11; ++r)
        for (int c = 0; c < 11; ++c)
            k(r, c) = 10.0 + 0.5 * (r - 5) + 0.25 * (c - 5);
    const AngularGrid h = resample(k, 0.05, 8, 8);
    for (int r = 0; r < h.rows; ++r)
        for (int c = 0; c < h.cols; ++c)
            EXPECT_NEAR(h(r, c), 10.0 + 0.25 * (r - 8) + 0.125 * (c - 8), 1e-12);
}

TEST(Kernel, CenterOnPeak)
{
    AngularGrid k = AngularGrid::zeros(5, 5, 0.1);
    k(1, 3) = 2.0;
    k(1, 2) = 1.0;
    const AngularGrid c = center_on_peak(k);
    EXPECT_EQ(c(2, 2), 2.0);
    EXPECT_EQ(c(2, 1), 1.0);
}

TEST(Kernel, SeparateOuterProduct)
{
    std::vector<double> h = {0.1, 0.5, 1.0, 0.4, 0.2};
    std::vector<double> v = {0.3, 1.0, 0.7};
    AngularGrid k = AngularGrid::zeros(3, 5, 0.1);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 5; ++c)
            k(r, c) = v[r] * h[c];
    const auto sep = separate(k, 1e-12);
    ASSERT_TRUE(sep);
    EXPECT_LT(sep->residual, 1e-14);
    const AngularGrid back = sep->outer();
    for (std::size_t i = 0; i < k.values.size(); ++i)
        EXPECT_NEAR(back.values[i], k.values[i], 1e-15);
    for (double x : sep->h)
        EXPECT_GE(x, 0.0);
}

TEST(Kernel, CrossPatternResidualMatchesSvd)
{
    AngularGrid k = AngularGrid::zeros(5, 5, 0.1);
    for (int i = 0; i < 5; ++i)
    {
        k(2, i) = 1.0;
        k(i, 2) = 1.0;
    }
    k(2, 2) = 2.0;
    const auto sv = singular_values(k.values, 5, 5);
    double tail = 0.0, all = 0.0;
    for (std::size_t i = 0; i < sv.size(); ++i)
    {
        all += sv[i] * sv[i];
        if (i > 0)
            tail += sv[i] * sv[i];
    }
    const SeparableKernel r1 = rank1_approximation(k);
    EXPECT_NEAR(r1.residual, std::sqrt(tail / all), 1e-9);
    EXPECT_GT(r1.residual, 0.1);
    EXPECT_FALSE(separate(k, 1e-3));
}

TEST(Kernel, SeparableGaussianIsRank1)
{
    const AngularGrid k = gaussian_kernel(deg2rad(0.3), deg2rad(0.15), 4.0, deg2rad(0.05));
    const auto sep = separate(k, 1e-12);
    ASSERT_TRUE(sep);
    EXPECT_EQ(static_cast<int>(sep->h.size()), k.cols);
    EXPECT_EQ(static_cast<int>(sep->v.size()), k.rows);
}

TEST(Kernel, Normalization)
{
    std::mt19937_64 rng(9);
    const AngularGrid k = testsupport::random_kernel(7, 0.1, rng);
    EXPECT_NEAR(normalize(k, Normalization::sum).sum(), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(normalize(k, Normalization::peak).max(), 1.0);
    EXPECT_THROW(normalize(AngularGrid::zeros(3, 3, 0.1), Normalization::sum), DomainError);
    EXPECT_EQ(normalization_from_string(to_string(Normalization::sum)), Normalization::sum);
}

TEST(Kernel, SlicesToGrid)
{
    AngularGrid h = AngularGrid::zeros(1, 3, 0.01);
    h.values = {0.5, 1.0, 0.5};
    AngularGrid v = AngularGrid::zeros(1, 5, 0.01);
    v.values = {0.1, 0.4, 1.0, 0.4, 0.1};
    const AngularGrid g = slices_to_grid(h, v);
    EXPECT_EQ(g.rows, 5);
    EXPECT_EQ(g.cols, 3);
    EXPECT_EQ(g(1, 0), 0.4 * 0.5);
    v.step_deg = 0.02;
    EXPECT_THROW(slices_to_grid(h, v), DomainError);
}

TEST(KernelFile, RoundTripIsExact)
{
    std::mt19937_64 rng(11);
    AngularGrid k = testsupport::random_kernel(9, 0.01, rng);
    k.normalization = Normalization::sum;
    std::stringstream ss;
    write_grid(k, ss);
    const AngularGrid r = parse_grid(ss, "mem");
    EXPECT_EQ(r.rows, k.rows);
    EXPECT_EQ(r.cols, k.cols);
    EXPECT_EQ(r.step_deg, 0.01);
    EXPECT_EQ(r.normalization, Normalization::sum);
    EXPECT_EQ(r.values, k.values);
}

TEST(KernelFile, ErrorsCarryLineNumbers)
{
    auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try
        {
            parse_grid(in, "k.txt");
        }
        catch (const ParseError& e)
        {
            return e.line();
        }
        return 999;
    };
    EXPECT_EQ(line_of("step_deg=0.1\nrows=1\ncols=3\n1 2 x\n"), 4u);
    EXPECT_EQ(line_of("step_deg=0.1\nrows=1\ncols=3\n1 2 -3\n"), 4u);
    // Missing row, even size, missing step.
    EXPECT_NE(line_of("step_deg=0.1\nrows=3\ncols=1\n1\n2\n"), 999u);
    EXPECT_NE(line_of("step_deg=0.1\nrows=2\ncols=1\n1\n2\n"), 999u);
    EXPECT_NE(line_of("rows=1\ncols=1\n1\n"), 999u);
}
