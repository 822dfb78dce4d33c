#include <cmath>
#include <numbers>
#include <random>

#include <catch_amalgamated.hpp>

#include "noonlab/analysis.hpp"
#include "oracles.hpp"

using namespace noonlab;
using namespace noonlab::analysis;
using Catch::Approx;

namespace
{
constexpr double kPi = std::numbers::pi;

std::vector<double> grid(int n) { return detection::uniform_phases(n); }

template <class F>
std::vector<double> sample(const std::vector<double>& phases, F f)
{
    std::vector<double> y;
    for (double p : phases)
        y.push_back(f(p));
    return y;
}
} // namespace

TEST_CASE("fit_trig recovers known curves", "[analysis]")
{
    const auto ph = grid(120);
    const auto w = uniform_weights(ph.size());

    SECTION("constant curve has zero visibility")
    {
        const auto y = sample(ph, [](double) { return 0.37; });
        const auto fit = fit_trig(ph, y, w, 3);
        CHECK(fit.c0 == Approx(0.37));
        CHECK(fit.visibility < 1e-12);
    }

    SECTION("1 + 0.8 cos 5 phi")
    {
        const auto y = sample(ph, [](double p) { return 1.0 + 0.8 * std::cos(5 * p); });
        const auto fit = fit_trig(ph, y, w, 5);
        CHECK(std::abs(fit.visibility - 0.8) < 1e-10);
        CHECK(fit.dominant_frequency() == 5);
        CHECK(fit.residual_rms < 1e-12);
    }

    SECTION("a phase offset does not change the visibility")
    {
        for (double delta : {0.3, 1.9, -2.4})
        {
            const auto y = sample(ph, [delta](double p) { return 2.0 + 1.2 * std::cos(4 * p + delta); });
            CHECK(fit_trig(ph, y, w, 4).visibility == Approx(0.6).epsilon(1e-10));
        }
    }

    SECTION("coefficients match the uniform-grid Fourier oracle")
    {
        const int deg = 6;
        const auto g = grid(4 * deg + 2);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> ca(deg), cb(deg);
        for (int k = 0; k < deg; ++k)
        {
            ca[k] = u(rng);
            cb[k] = u(rng);
        }
        const auto y = sample(g, [&](double p) {
            double v = 3.0;
            for (int k = 1; k <= deg; ++k)
                v += ca[k - 1] * std::cos(k * p) + cb[k - 1] * std::sin(k * p);
            return v;
        });
        const auto fit = fit_trig(g, y, uniform_weights(g.size()), deg);
        const auto ref = oracle::uniform_grid_fourier(y, deg);
        CHECK(std::abs(fit.c0 - static_cast<double>(ref.c0)) < 1e-12);
        for (int k = 0; k < deg; ++k)
        {
            CHECK(std::abs(fit.a[k] - static_cast<double>(ref.a[k])) < 1e-12);
            CHECK(std::abs(fit.b[k] - static_cast<double>(ref.b[k])) < 1e-12);
            CHECK(std::abs(fit.a[k] - ca[k]) < 1e-12);
        }
    }

    SECTION("visibility is scale invariant")
    {
        const auto y = sample(ph, [](double p) { return 0.5 + 0.2 * std::sin(3 * p) + 0.1 * std::cos(p); });
        std::vector<double> y2;
        for (double v : y)
            y2.push_back(1e-7 * v);
        CHECK(fit_trig(ph, y2, w, 3).visibility == Approx(fit_trig(ph, y, w, 3).visibility).epsilon(1e-10));
    }
}

TEST_CASE("fit_trig failure modes", "[analysis]")
{
    SECTION("degenerate phase grid")
    {
        const std::vector<double> ph(20, 0.4);
        const std::vector<double> y(20, 1.0);
        CHECK_THROWS_AS(fit_trig(ph, y, uniform_weights(20), 3), ConditioningError);
    }

    SECTION("too few samples and bad weights")
    {
        const auto ph = grid(6);
        const std::vector<double> y(6, 1.0);
        CHECK_THROWS_AS(fit_trig(ph, y, uniform_weights(6), 3), InvalidArgument);
        std::vector<double> w(6, 1.0);
        w[2] = 0.0;
        CHECK_THROWS_AS(fit_trig(ph, y, w, 2), InvalidArgument);
    }

    SECTION("zero offset leaves the visibility undefined")
    {
        const auto ph = grid(40);
        const auto y = sample(ph, [](double p) { return std::cos(2 * p); });
        CHECK_THROWS_AS(fit_trig(ph, y, uniform_weights(40), 2), NumericalError);
    }
}

TEST_CASE("visibility uncertainty shrinks as 1/sqrt(pulses)", "[analysis]")
{
    const auto ph = grid(60);
    const auto p = sample(ph, [](double x) { return 0.02 * (1.0 + 0.5 * std::cos(3 * x)); });
    std::vector<double> log_n, log_s;
    for (double pulses : {1e3, 1e4, 1e5})
    {
        std::mt19937_64 rng(static_cast<std::uint64_t>(pulses));
        std::vector<double> counts;
        for (double pi : p)
            counts.push_back(static_cast<double>(
                std::binomial_distribution<std::int64_t>(static_cast<std::int64_t>(pulses), pi)(rng)));
        const auto fit = fit_trig(ph, counts, poisson_weights(counts), 3);
        CHECK(fit.visibility == Approx(0.5).margin(5 * fit.sigma_visibility));
        log_n.push_back(std::log(pulses));
        log_s.push_back(std::log(fit.sigma_visibility));
    }
    const double slope = (log_s[2] - log_s[0]) / (log_n[2] - log_n[0]);
    CHECK(slope == Approx(-0.5).margin(0.1));
}

TEST_CASE("fringe_minima", "[analysis]")
{
    SECTION("1 + cos 2 phi")
    {
        detection::CoincidenceCurve c;
        c.phases = grid(100);
        c.rates = sample(c.phases, [](double p) { return 1.0 + std::cos(2 * p); });
        c.pattern = {1, 1};
        const auto m = fringe_minima(c);
        REQUIRE(m.size() == 2);
        CHECK(m[0].first == Approx(kPi / 2).margin(1e-6));
        CHECK(m[1].first == Approx(3 * kPi / 2).margin(1e-6));
        CHECK(std::abs(m[0].second) < 1e-10);
    }

    SECTION("flat curve has no minima")
    {
        detection::CoincidenceCurve c;
        c.phases = grid(50);
        c.rates.assign(50, 0.25);
        c.pattern = {2, 1};
        CHECK(fringe_minima(c).empty());
    }

    SECTION("ideal five-photon NOON fringe")
    {
        detection::CoincidenceCurve c;
        c.phases = grid(120);
        c.rates = sample(c.phases, [](double p) { return 0.3 * (1.0 - std::cos(5 * p + 0.2)); });
        c.pattern = {3, 2};
        const auto m = fringe_minima(c);
        REQUIRE(m.size() == 5);
        for (std::size_t i = 0; i < m.size(); ++i)
        {
            CHECK(std::abs(m[i].second) < 1e-10);
            if (i > 0)
                CHECK(m[i].first - m[i - 1].first == Approx(2 * kPi / 5).margin(1e-6));
        }
    }
}
