#pragma once
/// \file fock.hpp
/// Truncated Fock-space amplitudes of the two light sources (a coherent state
/// and single-mode squeezed vacuum) and their two-mode product.
///
/// Amplitudes are never renormalized after truncation: the missing
/// probability ("deficit") stays observable and is reported alongside the
/// amplitudes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "noonlab/errors.hpp"

namespace noonlab
{

using Complex = std::complex<double>;

namespace fock
{

/// What to do when a truncated expansion misses more than `tolerance` of
/// its probability.
struct TruncationPolicy
{
    enum class Action
    {
        warn,  ///< set the `truncation_warning` flag on the result
        raise, ///< throw TruncationError
    };

    double tolerance = 1e-10;
    Action on_exceed = Action::warn;

    static TruncationPolicy strict(double tol = 1e-10) { return {tol, Action::raise}; }
};

/// Single-mode amplitudes over photon numbers 0..cutoff.
struct ModeAmplitudes
{
    Eigen::VectorXcd amps;
    int cutoff = 0;
    double deficit = 0.0; ///< 1 - sum |amps|^2
    bool truncation_warning = false;

    double norm_squared() const { return amps.squaredNorm(); }
};

/// How the pair-amplitude ratio gamma maps to the coherent amplitude.
enum class GammaConvention
{
    linear,    ///< |alpha|^2 = gamma * r
    weak_pump, ///< |alpha|^2 = gamma * tanh(r); N-photon physics depends only on this ratio
};

inline std::string to_string(GammaConvention c)
{
    return c == GammaConvention::linear ? "linear" : "weak-pump";
}

inline GammaConvention gamma_convention_from_string(const std::string& s)
{
    if (s == "linear")
        return GammaConvention::linear;
    if (s == "weak-pump" || s == "weak_pump" || s == "tanh")
        return GammaConvention::weak_pump;
    throw InvalidArgument("unknown gamma convention '" + s + "' (expected linear|weak-pump)");
}

/// Phase added to the user-facing coherent-state phase before building the
/// input. With the symmetric-real beamsplitter the two-photon cross term
/// |1,1> cancels when alpha^2 = -tanh(r); this offset places that optimum at
/// phi_cs = pi (and equivalently 0).
inline constexpr double kCoherentPhaseOffset = std::numbers::pi / 2;

/// Parameters of the two input sources.
struct SourceSpec
{
    double r = 0.1;      ///< squeeze parameter, >= 0
    double gamma = 1.0;  ///< pair-amplitude ratio, > 0
    double phi_cs = std::numbers::pi;
    int cutoff = 0;      ///< per-mode photon cutoff; 0 selects auto_cutoff()
    GammaConvention convention = GammaConvention::weak_pump;

    /// |alpha| implied by gamma, r and the convention.
    double coherent_magnitude() const
    {
        const double denom = convention == GammaConvention::linear ? r : std::tanh(r);
        return std::sqrt(gamma * denom);
    }

    void validate() const
    {
        if (!(r >= 0.0) || !std::isfinite(r))
            throw InvalidArgument("squeeze parameter r must be finite and >= 0");
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw InvalidArgument("gamma must be finite and > 0");
        if (!std::isfinite(phi_cs))
            throw InvalidArgument("phi_cs must be finite");
        if (cutoff < 0)
            throw InvalidArgument("cutoff must be >= 0");
    }
};

/// Two-mode amplitudes amps(n_a, n_b), each index 0..cutoff.
///
/// `total_cap` is the largest total photon number that may carry amplitude;
/// beamsplitters map a state into one with cutoff == total_cap so no
/// amplitude is ever clipped.
struct TwoModeState
{
    Eigen::MatrixXcd amps;
    int cutoff = 0;
    int total_cap = 0;
    double deficit_a = 0.0; ///< per-mode deficits of the factors it was built from
    double deficit_b = 0.0;

    static TwoModeState zero(int cutoff, int total_cap)
    {
        TwoModeState s;
        s.amps = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
        s.cutoff = cutoff;
        s.total_cap = total_cap;
        return s;
    }

    static TwoModeState basis(int n_a, int n_b, int cutoff)
    {
        if (n_a < 0 || n_b < 0 || n_a > cutoff || n_b > cutoff)
            throw InvalidArgument("basis state outside cutoff");
        auto s = zero(cutoff, n_a + n_b);
        s.amps(n_a, n_b) = 1.0;
        return s;
    }

    double norm_squared() const { return amps.squaredNorm(); }
};

struct TruncationReport
{
    double deficit_a = 0.0;
    double deficit_b = 0.0;
    double deficit_joint = 0.0;
};

namespace detail
{

inline void check_cutoff(int cutoff)
{
    if (cutoff < 0)
        throw InvalidArgument("cutoff must be >= 0");
}

inline void apply_policy(ModeAmplitudes& m, const TruncationPolicy& policy, const char* what)
{
    m.deficit = std::max(0.0, 1.0 - m.norm_squared());
    if (m.deficit > policy.tolerance)
    {
        if (policy.on_exceed == TruncationPolicy::Action::raise)
            throw TruncationError(std::string(what) + ": cutoff " + std::to_string(m.cutoff) +
                                  " leaves truncation deficit " + std::to_string(m.deficit) +
                                  " above tolerance " + std::to_string(policy.tolerance));
        m.truncation_warning = true;
    }
}

} // namespace detail

/// c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!), alpha = magnitude * exp(i phase).
inline ModeAmplitudes coherent_amplitudes(double magnitude, double phase, int cutoff,
                                          const TruncationPolicy& policy = {})
{
    detail::check_cutoff(cutoff);
    if (!std::isfinite(magnitude) || magnitude < 0.0)
        throw InvalidArgument("coherent magnitude must be finite and >= 0");
    if (!std::isfinite(phase))
        throw InvalidArgument("coherent phase must be finite");

    ModeAmplitudes m;
    m.cutoff = cutoff;
    m.amps.resize(cutoff + 1);
    const Complex alpha = std::polar(magnitude, phase);
    // Ratio recurrence avoids forming alpha^n and n! separately.
    m.amps[0] = std::exp(-0.5 * magnitude * magnitude);
    for (int n = 1; n <= cutoff; ++n)
        m.amps[n] = m.amps[n - 1] * alpha / std::sqrt(static_cast<double>(n));
    detail::apply_policy(m, policy, "coherent_amplitudes");
    return m;
}

/// s_{2m} = (cosh r)^{-1/2} (-1)^m sqrt((2m)!) / (2^m m!) (tanh r)^m, odd terms zero.
inline ModeAmplitudes squeezed_vacuum_amplitudes(double r, int cutoff,
                                                 const TruncationPolicy& policy = {})
{
    detail::check_cutoff(cutoff);
    if (!std::isfinite(r) || r < 0.0)
        throw InvalidArgument("squeeze parameter must be finite and >= 0");

    ModeAmplitudes m;
    m.cutoff = cutoff;
    m.amps = Eigen::VectorXcd::Zero(cutoff + 1);
    const double t = std::tanh(r);
    double s = 1.0 / std::sqrt(std::cosh(r));
    m.amps[0] = s;
    for (int n = 2; n <= cutoff; n += 2)
    {
        s *= -t * std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n));
        m.amps[n] = s;
    }
    detail::apply_policy(m, policy, "squeezed_vacuum_amplitudes");
    return m;
}

/// Smallest per-mode cutoff that is at least max(4 n_target, ceil(|a|^2 + 6|a| + 10))
/// and keeps both single-mode deficits within `tolerance`.
inline int auto_cutoff(const SourceSpec& spec, int n_target = 0, double tolerance = 1e-10)
{
    spec.validate();
    const double a = spec.coherent_magnitude();
    int cutoff = std::max(4 * std::max(n_target, 0), static_cast<int>(std::ceil(a * a + 6.0 * a + 10.0)));
    constexpr int kMaxCutoff = 4096;
    const TruncationPolicy quiet{tolerance, TruncationPolicy::Action::warn};
    for (; cutoff <= kMaxCutoff; cutoff += 2)
    {
        if (!coherent_amplitudes(a, 0.0, cutoff, quiet).truncation_warning &&
            !squeezed_vacuum_amplitudes(spec.r, cutoff, quiet).truncation_warning)
            return cutoff;
    }
    throw TruncationError("no cutoff up to " + std::to_string(kMaxCutoff) +
                          " reaches truncation tolerance " + std::to_string(tolerance));
}

/// Product state |alpha>_a |xi>_b for the given source spec.
inline TwoModeState build_input(const SourceSpec& spec, const TruncationPolicy& policy = {})
{
    spec.validate();
    const int cutoff = spec.cutoff > 0 ? spec.cutoff : auto_cutoff(spec, 0, policy.tolerance);
    const auto c = coherent_amplitudes(spec.coherent_magnitude(), spec.phi_cs + kCoherentPhaseOffset,
                                       cutoff, policy);
    const auto s = squeezed_vacuum_amplitudes(spec.r, cutoff, policy);

    TwoModeState out;
    out.cutoff = cutoff;
    out.total_cap = 2 * cutoff;
    out.amps = c.amps * s.amps.transpose();
    out.deficit_a = c.deficit;
    out.deficit_b = s.deficit;
    return out;
}

inline TruncationReport truncation_report(const TwoModeState& state)
{
    return {state.deficit_a, state.deficit_b, std::max(0.0, 1.0 - state.norm_squared())};
}

} // namespace fock
} // namespace noonlab
