#pragma once
/// \file detection.hpp
/// Lossy multiplexed click detectors and coincidence-rate curves versus the
/// Mach-Zehnder phase.
///
/// The overall transmission eta is applied entirely at detection: loss after
/// the last beamsplitter commutes with photon counting, so the interferometer
/// state stays pure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "noonlab/errors.hpp"
#include "noonlab/fock.hpp"
#include "noonlab/noon.hpp"
#include "noonlab/optics.hpp"
#include "noonlab/parallel.hpp"

namespace noonlab::detection
{

/// An array of `modules` binary click detectors behind a lossless splitter,
/// preceded by transmission `eta`.
struct DetectorSpec
{
    int modules = 4;
    double eta = 1.0;

    void validate() const
    {
        if (modules < 1)
            throw InvalidArgument("detector needs at least one module");
        if (!(eta >= 0.0 && eta <= 1.0))
            throw InvalidArgument("detector transmission eta must lie in [0, 1]");
    }
};

struct ClickPattern
{
    int n1 = 0;
    int n2 = 0;
    int total() const { return n1 + n2; }
};

/// P(k1, k2) over click counts k_i = 0..modules_i.
struct ClickDistribution
{
    Eigen::MatrixXd p;

    double at(const ClickPattern& pat) const
    {
        if (pat.n1 < 0 || pat.n2 < 0 || pat.n1 >= p.rows() || pat.n2 >= p.cols())
            return 0.0;
        return p(pat.n1, pat.n2);
    }
};

struct CoincidenceCurve
{
    std::vector<double> phases;
    std::vector<double> rates;
    ClickPattern pattern;
};

/// Uniform grid of `points` phases over [0, 2 pi).
inline std::vector<double> uniform_phases(int points)
{
    if (points < 1)
        throw InvalidArgument("phase grid needs at least one point");
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        out[i] = 2.0 * std::numbers::pi * i / points;
    return out;
}

/// P'(m) = sum_n P(n) C(n,m) eta^m (1-eta)^(n-m).
inline std::vector<double> loss_transform(std::span<const double> p, double eta)
{
    if (!(eta >= 0.0 && eta <= 1.0))
        throw InvalidArgument("loss_transform: eta must lie in [0, 1]");
    const std::size_t n_max = p.empty() ? 0 : p.size() - 1;
    std::vector<double> out(p.size(), 0.0);
    // binom[m] holds the Binomial(n, eta) pmf, advanced one photon at a time.
    std::vector<double> binom(n_max + 1, 0.0);
    binom[0] = 1.0;
    for (std::size_t n = 0; n < p.size(); ++n)
    {
        if (n > 0)
            for (std::size_t m = n; m-- > 0;)
            {
                binom[m + 1] += eta * binom[m];
                binom[m] *= (1.0 - eta);
            }
        for (std::size_t m = 0; m <= n; ++m)
            out[m] += p[n] * binom[m];
    }
    return out;
}

/// P(k clicks | n photons), rows n = 0..n_max, columns k = 0..modules.
///
/// Each photon is lost with probability 1-eta, otherwise it lands in a
/// uniformly random module; a module clicks if it received any photon.
/// Built photon by photon over the number of lit modules, which is the
/// closed form C(D,k) sum_j (-1)^j C(k,j) (1-eta+eta(k-j)/D)^n without its
/// alternating-sum cancellation.
inline Eigen::MatrixXd multiplex_povm(const DetectorSpec& spec, int n_max)
{
    spec.validate();
    if (n_max < 0)
        throw InvalidArgument("multiplex_povm: n_max must be >= 0");
    const int d = spec.modules;
    Eigen::MatrixXd povm = Eigen::MatrixXd::Zero(n_max + 1, d + 1);
    Eigen::VectorXd lit = Eigen::VectorXd::Zero(d + 1);
    lit[0] = 1.0;
    povm.row(0) = lit.transpose();
    for (int n = 1; n <= n_max; ++n)
    {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(d + 1);
        for (int k = 0; k <= d; ++k)
        {
            if (lit[k] == 0.0)
                continue;
            const double up = spec.eta * static_cast<double>(d - k) / d;
            next[k] += lit[k] * (1.0 - up);
            if (k < d)
                next[k + 1] += lit[k] * up;
        }
        lit = next;
        povm.row(n) = lit.transpose();
    }
    return povm;
}

/// P(k1,k2) = sum_{n,m} P_joint(n,m) P(k1|n; spec1) P(k2|m; spec2).
inline ClickDistribution click_joint(const Eigen::MatrixXd& p_joint, const DetectorSpec& spec1,
                                     const DetectorSpec& spec2)
{
    const auto rows = static_cast<int>(p_joint.rows()), cols = static_cast<int>(p_joint.cols());
    if (rows < 1 || cols < 1)
        throw InvalidArgument("click_joint: empty joint distribution");
    const Eigen::MatrixXd povm1 = multiplex_povm(spec1, rows - 1);
    const Eigen::MatrixXd povm2 = multiplex_povm(spec2, cols - 1);
    return {povm1.transpose() * p_joint * povm2};
}

inline void validate_pattern(const ClickPattern& pat, const DetectorSpec& d1, const DetectorSpec& d2)
{
    if (pat.n1 < 0 || pat.n2 < 0 || pat.n1 > d1.modules || pat.n2 > d2.modules)
        throw InvalidArgument("invalid click pattern (" + std::to_string(pat.n1) + "," +
                              std::to_string(pat.n2) + ") for detectors with " +
                              std::to_string(d1.modules) + " and " + std::to_string(d2.modules) +
                              " modules");
}

/// Full click distribution after the interferometer at every phase.
/// `n_target` feeds the automatic cutoff when source.cutoff == 0.
inline std::vector<ClickDistribution> click_scan(const fock::SourceSpec& source,
                                                 const optics::BeamsplitterSpec& bs,
                                                 const DetectorSpec& det1, const DetectorSpec& det2,
                                                 const std::vector<double>& phases, int n_target = 0,
                                                 const fock::TruncationPolicy& policy = {})
{
    det1.validate();
    det2.validate();
    fock::SourceSpec resolved = source;
    if (resolved.cutoff == 0)
        resolved.cutoff = fock::auto_cutoff(source, n_target, policy.tolerance);
    const auto after_first = optics::apply_bs(fock::build_input(resolved, policy), bs);

    std::vector<ClickDistribution> out(phases.size());
    parallel_for(phases.size(), [&](std::size_t i) {
        const auto state = optics::apply_bs(optics::apply_phase(after_first, phases[i], optics::Mode::second), bs);
        out[i] = click_joint(optics::joint_number_distribution(state), det1, det2);
    });
    return out;
}

inline CoincidenceCurve pattern_curve(const std::vector<ClickDistribution>& dists,
                                      const std::vector<double>& phases, const ClickPattern& pattern)
{
    CoincidenceCurve curve;
    curve.phases = phases;
    curve.pattern = pattern;
    curve.rates.reserve(dists.size());
    for (const auto& d : dists)
        curve.rates.push_back(std::clamp(d.at(pattern), 0.0, 1.0));
    return curve;
}

/// Per-pulse probability of the (N1, N2) click pattern at each MZ phase.
inline CoincidenceCurve coincidence_scan(const fock::SourceSpec& source, const optics::BeamsplitterSpec& bs,
                                         const DetectorSpec& det1, const DetectorSpec& det2,
                                         const ClickPattern& pattern, const std::vector<double>& phases,
                                         const fock::TruncationPolicy& policy = {})
{
    validate_pattern(pattern, det1, det2);
    return pattern_curve(click_scan(source, bs, det1, det2, phases, pattern.total(), policy), phases, pattern);
}

/// Coincidence curve of a single normalized N-photon component sent through
/// the phase shifter and second beamsplitter (the NOON-projected fringe).
inline CoincidenceCurve component_scan(const noon::NPhotonComponent& comp, const optics::BeamsplitterSpec& bs,
                                       const DetectorSpec& det1, const DetectorSpec& det2,
                                       const ClickPattern& pattern, const std::vector<double>& phases)
{
    validate_pattern(pattern, det1, det2);
    auto state = fock::TwoModeState::zero(comp.n, comp.n);
    for (int k = 0; k <= comp.n; ++k)
        state.amps(k, comp.n - k) = comp.u[k];
    std::vector<ClickDistribution> dists(phases.size());
    parallel_for(phases.size(), [&](std::size_t i) {
        const auto out = optics::apply_bs(optics::apply_phase(state, phases[i], optics::Mode::second), bs);
        dists[i] = click_joint(optics::joint_number_distribution(out), det1, det2);
    });
    return pattern_curve(dists, phases, pattern);
}

/// Synthetic click records: for each phase, counts of every (k1, k2) outcome
/// over `pulses` independent pulses. Probability missing from a distribution
/// (truncation) is drawn into an unrecorded bucket.
struct SampledClicks
{
    std::int64_t pulses = 0;
    std::uint64_t seed = 0;
    std::vector<Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>> counts;

    std::vector<double> pattern_counts(const ClickPattern& pat) const
    {
        std::vector<double> out;
        out.reserve(counts.size());
        for (const auto& c : counts)
            out.push_back(pat.n1 < c.rows() && pat.n2 < c.cols() ? static_cast<double>(c(pat.n1, pat.n2)) : 0.0);
        return out;
    }
};

namespace detail
{

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream for one phase point, fixed by (seed, index) alone.
inline std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t index)
{
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~index)));
}

} // namespace detail

inline SampledClicks sample_clicks(const std::vector<ClickDistribution>& dists, std::int64_t pulses,
                                   std::uint64_t seed)
{
    if (pulses < 1)
        throw InvalidArgument("sample_clicks: pulses must be >= 1");
    SampledClicks out;
    out.pulses = pulses;
    out.seed = seed;
    out.counts.resize(dists.size());
    parallel_for(dists.size(), [&](std::size_t i) {
        auto rng = detail::stream_for(seed, i);
        const Eigen::MatrixXd& p = dists[i].p;
        auto& c = out.counts[i];
        c.setZero(p.rows(), p.cols());
        std::int64_t remaining = pulses;
        double remaining_p = 1.0;
        // Sequential conditional binomials give an exact multinomial draw.
        for (Eigen::Index col = 0; col < p.cols() && remaining > 0; ++col)
            for (Eigen::Index row = 0; row < p.rows() && remaining > 0; ++row)
            {
                const double pk = std::max(0.0, p(row, col));
                if (pk <= 0.0 || remaining_p <= 0.0)
                    continue;
                const double q = std::clamp(pk / remaining_p, 0.0, 1.0);
                std::binomial_distribution<std::int64_t> draw(remaining, q);
                const std::int64_t x = draw(rng);
                c(row, col) = x;
                remaining -= x;
                remaining_p -= pk;
            }
    });
    return out;
}

} // namespace noonlab::detection
