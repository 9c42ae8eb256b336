#include "lidarsim/echo.hpp"

#include "lidarsim/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace lidarsim
{

PulseShape PulseShape::delta(double step)
{
    PulseShape p;
    p.step = step;
    p.samples = {1.0};
    p.validate();
    return p;
}

PulseShape PulseShape::gaussian(double sigma_r, double step, double extent)
{
    if (!(sigma_r > 0.0 && step > 0.0 && extent > 0.0))
        throw DomainError("gaussian pulse needs positive sigma, step and extent");
    const int half = static_cast<int>(std::ceil(extent * sigma_r / step));
    if (half > 1'000'000)
        throw DomainError("pulse support too large");
    PulseShape p;
    p.step = step;
    p.samples.resize(static_cast<std::size_t>(2 * half + 1));
    for (int i = -half; i <= half; ++i)
    {
        const double x = i * step / sigma_r;
        p.samples[i + half] = std::exp(-0.5 * x * x);
    }
    return p;
}

void PulseShape::validate() const
{
    if (!(step > 0.0))
        throw DomainError("pulse step must be positive");
    if (samples.empty() || samples.size() % 2 == 0)
        throw DomainError("pulse needs an odd number of samples");
    for (double x : samples)
        if (!(x >= 0.0) || !std::isfinite(x))
            throw DomainError("pulse samples must be finite and non-negative");
}

PulseShape parse_pulse(std::istream& in, const std::string& source)
{
    const TextGrid t = read_text_grid(in, source);
    if (t.rows != 1)
        throw ParseError(source, 0, "pulse files must have rows=1");
    const auto it = t.header.find("step");
    if (it == t.header.end())
        throw ParseError(source, 0, "missing header 'step'");
    PulseShape p;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), p.step);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !(p.step > 0.0))
        throw ParseError(source, 0, "header 'step' must be a positive number");
    if (t.cols % 2 == 0)
        throw ParseError(source, 0, "pulse needs an odd number of samples");
    const double peak = *std::max_element(t.values.begin(), t.values.end());
    if (!(peak > 0.0))
        throw ParseError(source, 0, "pulse is identically zero");
    p.samples = t.values;
    for (double& x : p.samples)
        x /= peak;
    return p;
}

PulseShape load_pulse(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(path.string(), 0, "cannot open file");
    return parse_pulse(in, path.string());
}

void write_pulse(const PulseShape& p, std::ostream& out)
{
    p.validate();
    write_text_grid(out, {{"step", format_double(p.step)}}, 1, static_cast<int>(p.samples.size()),
                    {{"normalization", "peak"}}, p.samples);
}

void DetectionConfig::validate() const
{
    if (!(threshold > 0.0))
        throw DomainError("detection threshold must be positive");
    if (!(ambient_gain >= 0.0))
        throw DomainError("ambient gain must be non-negative");
}

std::vector<double> convolve_pulse(std::span<const double> eta, const PulseShape& pulse, double delta_r)
{
    pulse.validate();
    if (std::abs(pulse.step - delta_r) > 1e-9 * delta_r)
        throw DomainError("pulse must be sampled at the range bin width");
    const long n = static_cast<long>(eta.size());
    const long half = static_cast<long>(pulse.samples.size()) / 2;
    std::vector<double> out(eta.size(), 0.0);
    for (long j = 0; j < n; ++j)
    {
        const double x = eta[j];
        if (x == 0.0)
            continue;
        const long lo = std::max(0L, j - half);
        const long hi = std::min(n - 1, j + half);
        for (long i = lo; i <= hi; ++i)
            out[i] += x * pulse.samples[i - j + half];
    }
    return out;
}

std::vector<Echo> detect_echoes(std::span<const double> eta_hat, double delta_r, const DetectionConfig& cfg,
                                double ambient)
{
    cfg.validate();
    const double t = cfg.effective_threshold(ambient);
    const std::size_t n = eta_hat.size();
    std::vector<Echo> out;
    auto center = [delta_r](double i) { return (i + 0.5) * delta_r; };
    std::size_t i = 0;
    while (i < n)
    {
        if (!(eta_hat[i] > t))
        {
            ++i;
            continue;
        }
        const std::size_t begin = i;
        double peak = eta_hat[i];
        while (i < n && eta_hat[i] > t)
        {
            peak = std::max(peak, eta_hat[i]);
            ++i;
        }
        const std::size_t end = i; // one past the last sample above threshold

        Echo e;
        if (begin == 0)
            e.r0 = 0.0;
        else
        {
            const double a = eta_hat[begin - 1];
            const double b = eta_hat[begin];
            e.r0 = center(static_cast<double>(begin - 1) + (t - a) / (b - a));
        }
        if (end == n)
            e.r1 = static_cast<double>(n) * delta_r;
        else
        {
            const double a = eta_hat[end - 1];
            const double b = eta_hat[end];
            e.r1 = center(static_cast<double>(end - 1) + (a - t) / (a - b));
        }
        e.epw = e.r1 - e.r0;
        e.peak = peak;
        e.index = static_cast<int>(out.size());
        out.push_back(e);
    }
    return out;
}

std::optional<Echo> select_echo(std::span<const Echo> echoes, EchoPolicy policy)
{
    std::optional<Echo> best;
    for (const Echo& e : echoes)
    {
        if (!best)
        {
            best = e;
            continue;
        }
        bool better = false;
        switch (policy)
        {
        case EchoPolicy::nearest:
            better = e.r0 < best->r0;
            break;
        case EchoPolicy::strongest:
            better = e.peak > best->peak || (e.peak == best->peak && e.r0 < best->r0);
            break;
        case EchoPolicy::longest:
            better = e.epw > best->epw || (e.epw == best->epw && e.r0 < best->r0);
            break;
        }
        if (better)
            best = e;
    }
    return best;
}

} // namespace lidarsim
