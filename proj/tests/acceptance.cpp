// Acceptance suite: one PASS/FAIL line per criterion. With an id argument
// only that criterion runs; without arguments every criterion runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "noonlab/noonlab.hpp"

using namespace noonlab;

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kR = 0.1;

struct Outcome
{
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        pass = pass && ok;
        if (!detail.empty())
            detail += "; ";
        detail += what + (ok ? "" : " [X]");
    }
};

std::string num(double v, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double fidelity(double gamma, int n) { return noon::fidelity_at({kR, gamma, kPi}, n).fidelity_phase_opt; }

double gamma_star(int n) { return noon::optimal_gamma(n, kR, kPi).gamma_star; }

double frequency_n_visibility(const detection::CoincidenceCurve& c)
{
    const int n = c.pattern.total();
    return analysis::fit_trig(c.phases, c.rates, analysis::uniform_weights(c.rates.size()), n,
                              analysis::ErrorModel::residual_scaled)
        .visibility;
}

Outcome operating_points()
{
    Outcome o;
    const double f2 = fidelity(1.0, 2), f3 = fidelity(1.0, 3);
    const double f4 = fidelity(std::sqrt(3.0), 4), f5 = fidelity(2.163, 5);
    o.require(std::abs(f2 - 1.0) < 1e-6, "F2=" + num(f2, 10));
    o.require(std::abs(f3 - 1.0) < 1e-6, "F3=" + num(f3, 10));
    o.require(std::abs(f4 - 0.933) <= 0.003, "F4=" + num(f4));
    o.require(std::abs(f5 - 0.941) <= 0.003, "F5=" + num(f5));
    return o;
}

Outcome optimal_gammas()
{
    Outcome o;
    const std::vector<std::pair<int, double>> expected{{2, 1.0}, {3, 1.0}, {4, 1.732}, {5, 2.163}};
    for (auto [n, g] : expected)
    {
        const double got = gamma_star(n);
        o.require(std::abs(got - g) <= 0.01, "g" + std::to_string(n) + "=" + num(got) + " (want " + num(g) + ")");
    }
    return o;
}

Outcome universal_floor()
{
    Outcome o;
    const auto rows = noon::fidelity_sweep(2, 20);
    double worst = 1.0;
    int worst_n = 0;
    for (const auto& r : rows)
    {
        if (r.fidelity_phase_opt <= 0.92)
            o.require(false, "F" + std::to_string(r.n) + "=" + num(r.fidelity_phase_opt));
        if (r.fidelity_phase_opt < worst)
        {
            worst = r.fidelity_phase_opt;
            worst_n = r.n;
        }
    }
    o.require(worst > 0.92, "min F=" + num(worst) + " at N=" + std::to_string(worst_n));
    return o;
}

Outcome asymptote()
{
    Outcome o;
    const auto opt = noon::optimal_gamma(50, kR, kPi);
    o.require(std::abs(opt.fidelity_star - 0.943) <= 0.002,
              "F50=" + num(opt.fidelity_star) + " at gamma=" + num(opt.gamma_star));
    return o;
}

Outcome fixed_gamma_neighborhood()
{
    Outcome o;
    const double g = gamma_star(15);
    noon::SweepOptions opts;
    opts.mode = noon::GammaMode::fixed;
    opts.fixed_gamma = g;
    double worst = 1.0;
    for (const auto& r : noon::fidelity_sweep(12, 19, opts))
    {
        worst = std::min(worst, r.fidelity_phase_opt);
        if (r.fidelity_phase_opt <= 0.75)
            o.require(false, "F" + std::to_string(r.n) + "=" + num(r.fidelity_phase_opt));
    }
    o.require(worst > 0.75, "gamma*(15)=" + num(g) + ", min F(12..19)=" + num(worst));
    return o;
}

Outcome super_resolution()
{
    Outcome o;
    const detection::DetectorSpec ideal{64, 1.0};
    const auto phases = detection::uniform_phases(120);
    for (detection::ClickPattern pat : {detection::ClickPattern{1, 1}, detection::ClickPattern{2, 1},
                                        detection::ClickPattern{2, 2}, detection::ClickPattern{3, 2}})
    {
        const int n = pat.total();
        const auto curve = detection::coincidence_scan({kR, gamma_star(n), kPi}, {}, ideal, ideal, pat, phases);
        const auto fit = analysis::fit_trig(curve.phases, curve.rates, analysis::uniform_weights(120), 2 * n,
                                            analysis::ErrorModel::residual_scaled);
        const std::string tag = "(" + std::to_string(pat.n1) + "," + std::to_string(pat.n2) + ")";
        o.require(fit.dominant_frequency() == n, tag + " f=" + std::to_string(fit.dominant_frequency()));
        if (n <= 3)
        {
            const double v = frequency_n_visibility(curve);
            o.require(v > 0.9, tag + " V=" + num(v, 4));
        }
    }
    return o;
}

Outcome zero_structure()
{
    Outcome o;
    const detection::DetectorSpec ideal{64, 1.0};
    const auto comp = noon::output_component({kR, gamma_star(5), kPi}, 5);
    const auto curve = detection::component_scan(comp, {}, ideal, ideal, {3, 2}, detection::uniform_phases(120));
    const auto mins = analysis::fringe_minima(curve);
    const double peak = *std::max_element(curve.rates.begin(), curve.rates.end());
    o.require(mins.size() == 5, std::to_string(mins.size()) + " minima");
    double worst = 0.0;
    for (const auto& [phi, v] : mins)
        worst = std::max(worst, v / peak);
    o.require(worst < 0.05, "max min/peak=" + num(worst, 3));
    return o;
}

// Largest squeeze parameter (0.1 steps) whose noise-free (5,4) curve still has
// V9 > 0.1; stronger squeezing adds events but washes out the frequency-9 term.
// gamma* does not depend on r in the weak-pump convention.
constexpr double kLambda9R = 0.4;

Outcome lambda_over_nine()
{
    Outcome o;
    const detection::DetectorSpec det{16, 0.5};
    const detection::ClickPattern pat{5, 4};
    const auto phases = detection::uniform_phases(120);
    const fock::SourceSpec source{kLambda9R, gamma_star(9), kPi};
    const auto dists = detection::click_scan(source, {}, det, det, phases, pat.total());
    const std::int64_t pulses = 1000000; // per phase point
    const auto counts = detection::sample_clicks(dists, pulses, 20260101).pattern_counts(pat);
    double total = 0.0;
    for (double c : counts)
        total += c;
    const auto fit = analysis::fit_trig(phases, counts, analysis::poisson_weights(counts), 9);
    o.require(fit.visibility > 0.1, "V9=" + num(fit.visibility, 4));
    o.require(fit.visibility > 3.0 * fit.sigma_visibility, "sigma=" + num(fit.sigma_visibility, 3));

    const double v_ideal = frequency_n_visibility(detection::pattern_curve(dists, phases, pat));
    o.detail += "; r=" + num(kLambda9R) + ", " + num(total, 8) + " (5,4) events, noise-free V9=" + num(v_ideal, 4) +
                ", ~" + num(pulses * std::pow(3.0 * fit.sigma_visibility / v_ideal, 2.0), 2) +
                " pulses/point needed for 3 sigma";
    return o;
}

Outcome gamma_asymptotics()
{
    Outcome o;
    const double d10 = std::abs(gamma_star(10) / 5.0 - 1.0);
    const double d20 = std::abs(gamma_star(20) / 10.0 - 1.0);
    const double d40 = std::abs(gamma_star(40) / 20.0 - 1.0);
    o.require(d40 < 0.2, "|g40/20-1|=" + num(d40, 4));
    o.require(d10 > d20 && d20 > d40, "deviations " + num(d10, 4) + " > " + num(d20, 4) + " > " + num(d40, 4));
    return o;
}

std::vector<long double> oracle_column(int n, int m, long double t)
{
    // <k, N-k| U |n,m> from the polynomial (sqrt t c + sqrt(1-t) d)^n (sqrt(1-t) c - sqrt t d)^m
    const int total = n + m;
    auto binom = [](int a, int b) {
        long double r = 1;
        for (int i = 1; i <= b; ++i)
            r = r * (a - b + i) / i;
        return r;
    };
    auto fact = [](int a) {
        long double r = 1;
        for (int i = 2; i <= a; ++i)
            r *= i;
        return r;
    };
    const long double st = std::sqrt(t), sr = std::sqrt(1.0L - t);
    std::vector<long double> poly(total + 1, 0.0L);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= m; ++j)
            poly[i + j] += binom(n, i) * binom(m, j) * std::pow(st, i) * std::pow(sr, n - i) * std::pow(sr, j) *
                           std::pow(-st, m - j);
    for (int k = 0; k <= total; ++k)
        poly[k] *= std::sqrt(fact(k) * fact(total - k) / (fact(n) * fact(m)));
    return poly;
}

Outcome oracle_equivalence()
{
    Outcome o;
    double worst = 0.0;
    for (double t : {0.3, 0.5, 0.7})
        for (int total = 0; total <= 6; ++total)
        {
            const auto block = optics::bs_block(total, optics::BeamsplitterSpec{t});
            for (int n = 0; n <= total; ++n)
            {
                const auto col = oracle_column(n, total - n, t);
                for (int k = 0; k <= total; ++k)
                    worst = std::max(worst, static_cast<double>(std::abs(
                                                std::complex<long double>(block.matrix(k, n)) - col[k])));
            }
        }
    o.require(worst < 1e-12, "max error=" + num(worst, 3));
    return o;
}

Outcome detector_invariants()
{
    Outcome o;
    double worst = 0.0;
    for (int d : {1, 2, 4, 8, 16})
        for (double eta : {0.12, 0.5, 1.0})
        {
            const auto p = detection::multiplex_povm({d, eta}, 20);
            for (int n = 0; n <= 20; ++n)
                worst = std::max(worst, std::abs(p.row(n).sum() - 1.0));
        }
    o.require(worst <= 1e-12, "POVM completeness max dev=" + num(worst, 3));

    const auto phases = detection::uniform_phases(120);
    int violations = 0, checked = 0;
    for (detection::ClickPattern pat :
         {detection::ClickPattern{1, 0}, detection::ClickPattern{1, 1}, detection::ClickPattern{2, 1},
          detection::ClickPattern{2, 2}, detection::ClickPattern{3, 2}})
        for (double g : {1.0, std::sqrt(3.0), 2.163})
        {
            double prev = INFINITY;
            for (double eta : {1.0, 0.5, 0.12})
            {
                const detection::DetectorSpec det{4, eta};
                const auto c = detection::coincidence_scan({kR, g, kPi}, {}, det, det, pat, phases);
                double mean = 0.0;
                for (double r : c.rates)
                    mean += r / static_cast<double>(c.rates.size());
                violations += mean > prev;
                ++checked;
                prev = mean;
            }
        }
    o.require(violations == 0, "loss monotonicity " + std::to_string(checked - violations) + "/" +
                                   std::to_string(checked));
    return o;
}

Outcome lossy_visibilities()
{
    Outcome o;
    const auto phases = detection::uniform_phases(120);
    for (detection::ClickPattern pat : {detection::ClickPattern{1, 1}, detection::ClickPattern{2, 1},
                                        detection::ClickPattern{2, 2}, detection::ClickPattern{3, 2}})
    {
        const fock::SourceSpec src{kR, gamma_star(pat.total()), kPi};
        const detection::DetectorSpec ideal{4, 1.0}, lossy{4, 0.12};
        const double v1 = frequency_n_visibility(detection::coincidence_scan(src, {}, ideal, ideal, pat, phases));
        const double v012 = frequency_n_visibility(detection::coincidence_scan(src, {}, lossy, lossy, pat, phases));
        o.require(v012 < v1 && v012 > 0.0, "(" + std::to_string(pat.n1) + "," + std::to_string(pat.n2) +
                                               ") V=" + num(v1, 4) + " -> " + num(v012, 4));
    }
    return o;
}

struct Criterion
{
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> all{
        {1, "fidelities at operating points", 1.0, operating_points},
        {2, "optimal gamma", 5.0, optimal_gammas},
        {3, "universal fidelity floor N=2..20", 30.0, universal_floor},
        {4, "large-N asymptote", 60.0, asymptote},
        {5, "fixed-gamma neighborhood", 30.0, fixed_gamma_neighborhood},
        {6, "super-resolution fringes", 60.0, super_resolution},
        {7, "zero structure N=5", 10.0, zero_structure},
        {8, "lambda/9 observability", 300.0, lambda_over_nine},
        {9, "gamma asymptotics", 120.0, gamma_asymptotics},
        {10, "beamsplitter oracle equivalence", 1.0, oracle_equivalence},
        {11, "POVM completeness and loss monotonicity", 5.0, detector_invariants},
        {12, "lossy visibilities", 60.0, lossy_visibilities},
    };
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failures = 0, ran = 0;
    for (const auto& c : all)
    {
        if (only && c.id != only)
            continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (const std::exception& e)
        {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%s  %2d  %-42s %8.3fs (limit %gs%s)  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    c.limit_s, in_time ? "" : ", exceeded", o.detail.c_str());
    }
    if (!ran)
    {
        std::fprintf(stderr, "unknown criterion %s\n", argv[1]);
        return 2;
    }
    return failures ? 1 : 0;
}
