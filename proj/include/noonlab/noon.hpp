#pragma once
/// \file noon.hpp
/// Fixed-N projections of the post-beamsplitter state, NOON fidelity and the
/// per-N choice of the pair-amplitude ratio gamma.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "noonlab/errors.hpp"
#include "noonlab/fock.hpp"
#include "noonlab/optics.hpp"

namespace noonlab::noon
{

using fock::SourceSpec;
using fock::TwoModeState;

/// Normalized amplitudes u_k over |k, N-k> plus the probability of the N-photon event.
struct NPhotonComponent
{
    int n = 0;
    Eigen::VectorXcd u;
    double weight = 0.0;
};

struct FidelityResult
{
    int n = 0;
    double gamma = 0.0;
    double weight = 0.0;
    double fidelity_fixed = 0.0;     ///< |<N::0|psi_N>|^2 with the + relative phase
    double fidelity_phase_opt = 0.0; ///< maximum over the NOON relative phase
};

inline constexpr double kDegenerateWeight = 1e-300;

inline NPhotonComponent project_n(const TwoModeState& state, int n)
{
    if (n < 0 || n > state.total_cap)
        throw InvalidArgument("project_n: N outside the state's photon-number range");
    NPhotonComponent comp;
    comp.n = n;
    comp.u = Eigen::VectorXcd::Zero(n + 1);
    for (int k = 0; k <= n; ++k)
        if (k <= state.cutoff && n - k <= state.cutoff)
            comp.u[k] = state.amps(k, n - k);
    comp.weight = comp.u.squaredNorm();
    if (!(comp.weight > kDegenerateWeight))
        throw DegenerateSubspaceError("project_n: the N=" + std::to_string(n) +
                                      " subspace carries no amplitude");
    comp.u /= std::sqrt(comp.weight);
    return comp;
}

/// Post-beamsplitter N-photon component computed directly from the source
/// amplitudes and the single Fock block N. Equal to
/// project_n(apply_bs(build_input(spec)), N) but independent of any
/// two-mode cutoff.
inline NPhotonComponent output_component(const SourceSpec& spec, int n,
                                         const optics::BeamsplitterSpec& bs = {})
{
    spec.validate();
    if (n < 0)
        throw InvalidArgument("output_component: N must be >= 0");
    const fock::TruncationPolicy quiet{1.0, fock::TruncationPolicy::Action::warn};
    const auto c = fock::coherent_amplitudes(spec.coherent_magnitude(),
                                             spec.phi_cs + fock::kCoherentPhaseOffset, n, quiet);
    const auto s = fock::squeezed_vacuum_amplitudes(spec.r, n, quiet);
    Eigen::VectorXcd in(n + 1);
    for (int j = 0; j <= n; ++j)
        in[j] = c.amps[j] * s.amps[n - j];

    NPhotonComponent comp;
    comp.n = n;
    comp.weight = in.squaredNorm();
    if (!(comp.weight > kDegenerateWeight))
        throw DegenerateSubspaceError("output_component: the N=" + std::to_string(n) +
                                      " subspace carries no amplitude");
    // Normalize before the block to keep tiny weights away from underflow.
    in /= std::sqrt(comp.weight);
    comp.u = optics::bs_block(n, bs).matrix * in;
    comp.u /= comp.u.norm();
    return comp;
}

inline FidelityResult noon_fidelity(const NPhotonComponent& comp)
{
    FidelityResult r;
    r.n = comp.n;
    r.weight = comp.weight;
    if (comp.n == 0)
    {
        r.fidelity_fixed = r.fidelity_phase_opt = std::norm(comp.u[0]);
        return r;
    }
    const Complex u0 = comp.u[0], un = comp.u[comp.n];
    r.fidelity_fixed = std::norm(u0 + un) / 2.0;
    const double sum = std::abs(u0) + std::abs(un);
    r.fidelity_phase_opt = std::max(sum * sum / 2.0, r.fidelity_fixed);
    return r;
}

/// Fidelity of the N-photon output component at a given source spec.
inline FidelityResult fidelity_at(const SourceSpec& spec, int n, const optics::BeamsplitterSpec& bs = {})
{
    auto r = noon_fidelity(output_component(spec, n, bs));
    r.gamma = spec.gamma;
    return r;
}

struct OptimizerOptions
{
    double gamma_min = 0.05;
    double gamma_max = 0.0; ///< 0 selects 2N
    int grid_points = 64;
    double gamma_tolerance = 1e-6;
    int max_iterations = 200;
};

struct GammaOptimum
{
    double gamma_star = 0.0;
    double fidelity_star = 0.0;
    int iterations = 0; ///< golden-section iterations after the grid scan
};

/// Maximizes the phase-optimal fidelity over gamma: log-spaced grid scan,
/// then golden-section refinement inside the bracket around the best grid point.
inline GammaOptimum optimal_gamma(int n, double r, double phi_cs,
                                  fock::GammaConvention convention = fock::GammaConvention::weak_pump,
                                  const OptimizerOptions& opts = {})
{
    if (n < 2)
        throw InvalidArgument("optimal_gamma requires N >= 2");
    if (opts.grid_points < 3)
        throw InvalidArgument("optimal_gamma: grid needs at least 3 points");
    const double g_lo = opts.gamma_min;
    const double g_hi = opts.gamma_max > 0.0 ? opts.gamma_max : 2.0 * n;
    if (!(g_lo > 0.0 && g_hi > g_lo))
        throw InvalidArgument("optimal_gamma: invalid gamma range");

    SourceSpec spec;
    spec.r = r;
    spec.phi_cs = phi_cs;
    spec.convention = convention;
    auto objective = [&](double g) {
        spec.gamma = g;
        return fidelity_at(spec, n).fidelity_phase_opt;
    };

    std::vector<double> grid(opts.grid_points), vals(opts.grid_points);
    const double log_lo = std::log(g_lo), step = (std::log(g_hi) - log_lo) / (opts.grid_points - 1);
    for (int i = 0; i < opts.grid_points; ++i)
    {
        grid[i] = std::exp(log_lo + step * i);
        vals[i] = objective(grid[i]);
    }
    const auto best = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    double a = grid[std::max(best - 1, 0)];
    double b = grid[std::min(best + 1, opts.grid_points - 1)];

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    int it = 0;
    while (b - a > opts.gamma_tolerance)
    {
        if (++it > opts.max_iterations)
        {
            std::ostringstream msg;
            msg.precision(12);
            msg << "optimal_gamma(N=" << n << "): no convergence after " << opts.max_iterations
                << " iterations; bracket [" << a << ", " << b << "], best grid gamma " << grid[best]
                << " with fidelity " << vals[best];
            throw ConvergenceError(msg.str());
        }
        if (f1 >= f2)
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
        }
        else
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
        }
    }
    GammaOptimum out;
    out.gamma_star = 0.5 * (a + b);
    out.fidelity_star = objective(out.gamma_star);
    out.iterations = it;
    // The bracket interior can never be worse than the grid point it surrounds.
    if (vals[best] > out.fidelity_star)
    {
        out.gamma_star = grid[best];
        out.fidelity_star = vals[best];
    }
    return out;
}

enum class GammaMode
{
    per_n_optimal,
    fixed,
};

struct SweepOptions
{
    double r = 0.1;
    double phi_cs = std::numbers::pi;
    fock::GammaConvention convention = fock::GammaConvention::weak_pump;
    GammaMode mode = GammaMode::per_n_optimal;
    double fixed_gamma = 1.0;
    OptimizerOptions optimizer{};
};

/// One FidelityResult per N in [n_min, n_max]. N < 2 is reported at the
/// fixed gamma (or gamma = 1 in per-N mode) since there is nothing to optimize.
inline std::vector<FidelityResult> fidelity_sweep(int n_min, int n_max, const SweepOptions& opts = {})
{
    if (n_min < 0 || n_max < n_min)
        throw InvalidArgument("fidelity_sweep: invalid N range");
    std::vector<FidelityResult> out;
    out.reserve(static_cast<std::size_t>(n_max - n_min + 1));
    SourceSpec spec;
    spec.r = opts.r;
    spec.phi_cs = opts.phi_cs;
    spec.convention = opts.convention;
    for (int n = n_min; n <= n_max; ++n)
    {
        if (opts.mode == GammaMode::fixed)
            spec.gamma = opts.fixed_gamma;
        else if (n >= 2)
            spec.gamma = optimal_gamma(n, opts.r, opts.phi_cs, opts.convention, opts.optimizer).gamma_star;
        else
            spec.gamma = 1.0;
        out.push_back(fidelity_at(spec, n));
    }
    return out;
}

} // namespace noonlab::noon
