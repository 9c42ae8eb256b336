#include "lidarsim/kernel.hpp"

#include "lidarsim/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lidarsim
{

std::string to_string(Normalization n)
{
    switch (n)
    {
    case Normalization::peak:
        return "peak";
    case Normalization::sum:
        return "sum";
    case Normalization::raw:
        break;
    }
    return "raw";
}

Normalization normalization_from_string(const std::string& s)
{
    if (s == "peak")
        return Normalization::peak;
    if (s == "sum")
        return Normalization::sum;
    if (s == "raw")
        return Normalization::raw;
    throw DomainError("unknown normalization '" + s + "'");
}

namespace
{

void check_shape(int rows, int cols, double step_deg)
{
    if (rows < 1 || cols < 1 || rows % 2 == 0 || cols % 2 == 0)
        throw DomainError("kernel grids need odd, positive dimensions");
    if (!(step_deg > 0.0) || !std::isfinite(step_deg))
        throw DomainError("kernel step must be positive");
}

bool same_step(double a, double b)
{
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

} // namespace

AngularGrid AngularGrid::zeros(int rows, int cols, double step_deg)
{
    check_shape(rows, cols, step_deg);
    AngularGrid g;
    g.rows = rows;
    g.cols = cols;
    g.step_deg = step_deg;
    g.values.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    return g;
}

double AngularGrid::step_rad() const
{
    return deg2rad(step_deg);
}

double AngularGrid::at_offset(int dv, int du) const
{
    const int r = dv + half_rows();
    const int c = du + half_cols();
    if (r < 0 || c < 0 || r >= rows || c >= cols)
        return 0.0;
    return (*this)(r, c);
}

double AngularGrid::sum() const
{
    return std::accumulate(values.begin(), values.end(), 0.0);
}

double AngularGrid::max() const
{
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

void AngularGrid::validate() const
{
    check_shape(rows, cols, step_deg);
    if (values.size() != static_cast<std::size_t>(rows) * cols)
        throw DomainError("kernel value count does not match its dimensions");
    for (double x : values)
        if (!(x >= 0.0) || !std::isfinite(x))
            throw DomainError("kernel values must be finite and non-negative");
}

AngularGrid SeparableKernel::outer() const
{
    AngularGrid g = AngularGrid::zeros(static_cast<int>(v.size()), static_cast<int>(h.size()), step_deg);
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c)
            g(r, c) = v[r] * h[c];
    return g;
}

namespace
{

int half_extent(double sigma, double extent, double step, int max_side)
{
    const double half = std::ceil(extent * sigma / step - 1e-9);
    if (!(half >= 0.0) || 2.0 * half + 1.0 > max_side)
        throw DomainError("kernel grid would exceed the maximum size of " + std::to_string(max_side));
    return static_cast<int>(half);
}

AngularGrid sampled_gaussian(double sigma_h, double sigma_v, int half_rows, int half_cols, double step)
{
    AngularGrid g = AngularGrid::zeros(2 * half_rows + 1, 2 * half_cols + 1, rad2deg(step));
    for (int r = 0; r < g.rows; ++r)
    {
        const double y = (r - half_rows) * step / sigma_v;
        for (int c = 0; c < g.cols; ++c)
        {
            const double x = (c - half_cols) * step / sigma_h;
            g(r, c) = std::exp(-0.5 * (x * x + y * y));
        }
    }
    return g;
}

} // namespace

AngularGrid gaussian_kernel(double sigma_h, double sigma_v, double extent, double step, int max_side)
{
    if (!(sigma_h > 0.0 && sigma_v > 0.0 && step > 0.0))
        throw DomainError("gaussian kernel needs positive sigmas and step");
    if (!(extent >= 1.0))
        throw DomainError("gaussian kernel extent must be at least one sigma");
    const int hc = half_extent(sigma_h, extent, step, max_side);
    const int hr = half_extent(sigma_v, extent, step, max_side);
    AngularGrid g = sampled_gaussian(sigma_h, sigma_v, hr, hc, step);
    g.normalization = Normalization::peak;
    return g;
}

AngularGrid composite_gaussian(double core_sigma, double tail_sigma, double tail_amplitude, double extent, double step,
                               int max_side)
{
    if (!(core_sigma > 0.0 && tail_sigma > 0.0 && step > 0.0 && tail_amplitude >= 0.0))
        throw DomainError("composite kernel needs positive sigmas and step");
    if (!(extent >= 1.0))
        throw DomainError("composite kernel extent must be at least one sigma");
    const int half = half_extent(std::max(core_sigma, tail_sigma), extent, step, max_side);
    AngularGrid g = sampled_gaussian(core_sigma, core_sigma, half, half, step);
    const AngularGrid tail = sampled_gaussian(tail_sigma, tail_sigma, half, half, step);
    for (std::size_t i = 0; i < g.values.size(); ++i)
        g.values[i] += tail_amplitude * tail.values[i];
    return normalize(g, Normalization::peak);
}

AngularGrid resample(const AngularGrid& g, double step_deg, int half_rows, int half_cols)
{
    g.validate();
    AngularGrid out = AngularGrid::zeros(2 * half_rows + 1, 2 * half_cols + 1, step_deg);
    out.normalization = Normalization::raw;
    const double scale = step_deg / g.step_deg;
    for (int r = 0; r < out.rows; ++r)
    {
        const double fr = (r - half_rows) * scale + g.half_rows();
        const double r0 = std::floor(fr);
        const double tr = fr - r0;
        for (int c = 0; c < out.cols; ++c)
        {
            const double fc = (c - half_cols) * scale + g.half_cols();
            const double c0 = std::floor(fc);
            const double tc = fc - c0;
            auto sample = [&](double rr, double cc) {
                if (rr < 0 || cc < 0 || rr >= g.rows || cc >= g.cols)
                    return 0.0;
                return g(static_cast<int>(rr), static_cast<int>(cc));
            };
            out(r, c) = (1 - tr) * ((1 - tc) * sample(r0, c0) + tc * sample(r0, c0 + 1)) +
                        tr * ((1 - tc) * sample(r0 + 1, c0) + tc * sample(r0 + 1, c0 + 1));
        }
    }
    return out;
}

AngularGrid resample_to_step(const AngularGrid& g, double step_deg)
{
    const double scale = g.step_deg / step_deg;
    const int hr = static_cast<int>(std::floor(g.half_rows() * scale + 1e-9));
    const int hc = static_cast<int>(std::floor(g.half_cols() * scale + 1e-9));
    if (2 * std::max(hr, hc) + 1 > kMaxKernelSide)
        throw DomainError("resampled kernel would exceed the maximum size");
    return resample(g, step_deg, hr, hc);
}

AngularGrid combine(const AngularGrid& emitter, const AngularGrid& collector, ResamplePolicy policy)
{
    emitter.validate();
    collector.validate();
    const bool match = emitter.rows == collector.rows && emitter.cols == collector.cols &&
                       same_step(emitter.step_deg, collector.step_deg);
    if (!match && policy == ResamplePolicy::forbid)
        throw DomainError("emitter and collector grids differ in step or size; resample explicitly");
    const AngularGrid c =
        match ? collector : resample(collector, emitter.step_deg, emitter.half_rows(), emitter.half_cols());
    AngularGrid out = emitter;
    out.normalization = Normalization::raw;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = emitter.values[i] * c.values[i];
    return out;
}

AngularGrid center_on_peak(const AngularGrid& g)
{
    g.validate();
    const auto it = std::max_element(g.values.begin(), g.values.end());
    const auto idx = static_cast<int>(it - g.values.begin());
    const int dr = idx / g.cols - g.half_rows();
    const int dc = idx % g.cols - g.half_cols();
    AngularGrid out = g;
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c)
        {
            const int sr = r + dr;
            const int sc = c + dc;
            out(r, c) = (sr < 0 || sc < 0 || sr >= g.rows || sc >= g.cols) ? 0.0 : g(sr, sc);
        }
    return out;
}

SeparableKernel rank1_approximation(const AngularGrid& kernel)
{
    kernel.validate();
    const int R = kernel.rows;
    const int C = kernel.cols;
    double frob = 0.0;
    for (double x : kernel.values)
        frob += x * x;
    if (!(frob > 0.0))
        throw DomainError("cannot separate a zero kernel");

    // Power iteration on K^T K for the dominant right singular vector.
    std::vector<double> a(R, 0.0);
    std::vector<double> b(C, 0.0);
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            b[c] += kernel(r, c);
    auto normalize_vec = [](std::vector<double>& x) {
        double n = 0.0;
        for (double e : x)
            n += e * e;
        n = std::sqrt(n);
        if (n > 0.0)
            for (double& e : x)
                e /= n;
        return n;
    };
    if (normalize_vec(b) == 0.0)
    {
        std::fill(b.begin(), b.end(), 1.0);
        normalize_vec(b);
    }
    double sigma = 0.0;
    for (int iter = 0; iter < 10000; ++iter)
    {
        std::fill(a.begin(), a.end(), 0.0);
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < C; ++c)
                a[r] += kernel(r, c) * b[c];
        normalize_vec(a);
        std::fill(b.begin(), b.end(), 0.0);
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < C; ++c)
                b[c] += kernel(r, c) * a[r];
        const double s = normalize_vec(b);
        const bool done = std::abs(s - sigma) <= 1e-15 * s;
        sigma = s;
        if (done)
            break;
    }

    if (std::accumulate(a.begin(), a.end(), 0.0) < 0.0)
    {
        for (double& e : a)
            e = -e;
        for (double& e : b)
            e = -e;
    }
    const double scale = std::sqrt(sigma);
    SeparableKernel out;
    out.step_deg = kernel.step_deg;
    out.v.resize(R);
    out.h.resize(C);
    for (int r = 0; r < R; ++r)
        out.v[r] = std::max(0.0, a[r] * scale);
    for (int c = 0; c < C; ++c)
        out.h[c] = std::max(0.0, b[c] * scale);

    double err = 0.0;
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
        {
            const double d = kernel(r, c) - out.v[r] * out.h[c];
            err += d * d;
        }
    out.residual = std::min(1.0, std::sqrt(err / frob));
    return out;
}

std::optional<SeparableKernel> separate(const AngularGrid& kernel, double tolerance)
{
    SeparableKernel k = rank1_approximation(kernel);
    if (k.residual > tolerance)
        return std::nullopt;
    return k;
}

AngularGrid normalize(const AngularGrid& kernel, Normalization mode)
{
    kernel.validate();
    AngularGrid out = kernel;
    out.normalization = mode;
    if (mode == Normalization::raw)
        return out;
    const double denom = mode == Normalization::peak ? kernel.max() : kernel.sum();
    if (!(denom > 0.0))
        throw DomainError("cannot normalize a zero kernel");
    for (double& x : out.values)
        x /= denom;
    return out;
}

AngularGrid slices_to_grid(const AngularGrid& h_slice, const AngularGrid& v_slice)
{
    h_slice.validate();
    v_slice.validate();
    if (h_slice.rows != 1 || v_slice.rows != 1)
        throw DomainError("sensitivity slices must have a single row");
    if (!same_step(h_slice.step_deg, v_slice.step_deg))
        throw DomainError("sensitivity slices have different angular steps");
    AngularGrid out = AngularGrid::zeros(v_slice.cols, h_slice.cols, h_slice.step_deg);
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c)
            out(r, c) = v_slice.values[r] * h_slice.values[c];
    return out;
}

// ---- text grid files -------------------------------------------------------

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace
{

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int header_int(const TextGrid& g, const std::string& key, const std::string& source)
{
    const auto it = g.header.find(key);
    if (it == g.header.end())
        throw ParseError(source, 0, "missing header '" + key + "'");
    int value = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || value <= 0)
        throw ParseError(source, 0, "header '" + key + "' must be a positive integer");
    return value;
}

} // namespace

TextGrid read_text_grid(std::istream& in, const std::string& source)
{
    TextGrid g;
    std::string line;
    std::size_t lineno = 0;
    bool in_data = false;
    std::size_t expected = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        if (!in_data && t.find('=') != std::string::npos)
        {
            const auto eq = t.find('=');
            const std::string key = trim(t.substr(0, eq));
            if (key.empty())
                throw ParseError(source, lineno, "empty header key");
            if (!g.header.emplace(key, trim(t.substr(eq + 1))).second)
                throw ParseError(source, lineno, "duplicate header '" + key + "'");
            continue;
        }
        if (!in_data)
        {
            in_data = true;
            g.rows = header_int(g, "rows", source);
            g.cols = header_int(g, "cols", source);
            expected = static_cast<std::size_t>(g.rows) * g.cols;
            g.values.reserve(expected);
        }
        std::istringstream ls(t);
        std::string tok;
        std::size_t in_row = 0;
        while (ls >> tok)
        {
            double v = 0.0;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v))
                throw ParseError(source, lineno, "malformed value '" + tok + "'");
            if (v < 0.0)
                throw ParseError(source, lineno, "negative value '" + tok + "'");
            if (g.values.size() == expected)
                throw ParseError(source, lineno, "more values than rows * cols");
            g.values.push_back(v);
            ++in_row;
        }
        if (in_row != static_cast<std::size_t>(g.cols))
            throw ParseError(source, lineno,
                             "expected " + std::to_string(g.cols) + " values per row, got " + std::to_string(in_row));
    }
    if (!in_data)
    {
        g.rows = header_int(g, "rows", source);
        g.cols = header_int(g, "cols", source);
        expected = static_cast<std::size_t>(g.rows) * g.cols;
    }
    if (g.values.size() != expected)
        throw ParseError(source, lineno,
                         "expected " + std::to_string(expected) + " values, got " + std::to_string(g.values.size()));
    return g;
}

void write_text_grid(std::ostream& out, const HeaderList& leading, int rows, int cols, const HeaderList& trailing,
                     const std::vector<double>& values)
{
    for (const auto& [k, v] : leading)
        out << k << '=' << v << '\n';
    out << "rows=" << rows << '\n' << "cols=" << cols << '\n';
    for (const auto& [k, v] : trailing)
        out << k << '=' << v << '\n';
    for (int r = 0; r < rows; ++r)
    {
        for (int c = 0; c < cols; ++c)
        {
            if (c)
                out << ' ';
            out << format_double(values[static_cast<std::size_t>(r) * cols + c]);
        }
        out << '\n';
    }
}

AngularGrid parse_grid(std::istream& in, const std::string& source)
{
    const TextGrid t = read_text_grid(in, source);
    const auto step_it = t.header.find("step_deg");
    if (step_it == t.header.end())
        throw ParseError(source, 0, "missing header 'step_deg'");
    AngularGrid g;
    const auto& s = step_it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), g.step_deg);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !(g.step_deg > 0.0))
        throw ParseError(source, 0, "header 'step_deg' must be a positive number");
    g.rows = t.rows;
    g.cols = t.cols;
    if (g.rows % 2 == 0 || g.cols % 2 == 0)
        throw ParseError(source, 0, "kernel grids need odd dimensions");
    g.values = t.values;
    if (const auto it = t.header.find("normalization"); it != t.header.end())
    {
        try
        {
            g.normalization = normalization_from_string(it->second);
        }
        catch (const DomainError& e)
        {
            throw ParseError(source, 0, e.what());
        }
    }
    return g;
}

AngularGrid load_grid(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(path.string(), 0, "cannot open file");
    return parse_grid(in, path.string());
}

void write_grid(const AngularGrid& g, std::ostream& out)
{
    write_text_grid(out, {{"step_deg", format_double(g.step_deg)}}, g.rows, g.cols,
                    {{"normalization", to_string(g.normalization)}}, g.values);
}

void save_grid(const AngularGrid& g, const std::filesystem::path& path)
{
    g.validate();
    std::ofstream out(path);
    if (!out)
        throw ParseError(path.string(), 0, "cannot open file for writing");
    write_grid(g, out);
    if (!out)
        throw ParseError(path.string(), 0, "write failed");
}

AngularGrid load_measurement(const std::filesystem::path& path)
{
    return load_grid(path);
}

AngularGrid load_sensitivity_slices(const std::filesystem::path& h_path, const std::filesystem::path& v_path)
{
    const AngularGrid h = load_grid(h_path);
    const AngularGrid v = load_grid(v_path);
    if (h.rows != 1)
        throw ParseError(h_path.string(), 0, "slice files must have rows=1");
    if (v.rows != 1)
        throw ParseError(v_path.string(), 0, "slice files must have rows=1");
    if (!same_step(h.step_deg, v.step_deg))
        throw ParseError(v_path.string(), 0, "slice step differs from " + h_path.string());
    return slices_to_grid(h, v);
}

} // namespace lidarsim
