#pragma once
/// \file analysis.hpp
/// Weighted least-squares trigonometric fits of fringe data and the
/// derived visibility of the frequency-N component.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "noonlab/detection.hpp"
#include "noonlab/errors.hpp"

namespace noonlab::analysis
{

/// How the coefficient covariance is scaled.
enum class ErrorModel
{
    /// Weights are inverse variances; covariance = (A^T W A)^-1.
    inverse_variance,
    /// Weights are relative; covariance additionally scaled by the reduced chi^2.
    residual_scaled,
};

/// rate(phi) ~ c0 + sum_{k=1..degree} a_k cos(k phi) + b_k sin(k phi)
struct TrigFit
{
    int degree = 0;
    double c0 = 0.0;
    std::vector<double> a; ///< a[k-1] multiplies cos(k phi)
    std::vector<double> b; ///< b[k-1] multiplies sin(k phi)
    double residual_rms = 0.0;
    double visibility = 0.0;       ///< sqrt(a_N^2 + b_N^2) / c0
    double sigma_visibility = 0.0; ///< first-order propagation of the LS covariance
    Eigen::MatrixXd covariance;    ///< order: c0, a_1, b_1, ..., a_N, b_N

    double amplitude(int k) const
    {
        if (k == 0)
            return std::abs(c0);
        if (k < 1 || k > degree)
            return 0.0;
        return std::hypot(a[k - 1], b[k - 1]);
    }

    double operator()(double phi) const
    {
        double v = c0;
        for (int k = 1; k <= degree; ++k)
            v += a[k - 1] * std::cos(k * phi) + b[k - 1] * std::sin(k * phi);
        return v;
    }

    /// Frequency 1..degree carrying the largest amplitude.
    int dominant_frequency() const
    {
        int best = 0;
        double best_amp = -1.0;
        for (int k = 1; k <= degree; ++k)
            if (amplitude(k) > best_amp)
            {
                best_amp = amplitude(k);
                best = k;
            }
        return best;
    }
};

/// Condition-number ceiling of the weighted design matrix.
inline constexpr double kMaxCondition = 1e12;
/// Offsets below this make the visibility undefined.
inline constexpr double kMinOffset = 1e-12;

namespace detail
{

/// Solves the weighted LS problem and fills everything except the visibility.
inline TrigFit solve(std::span<const double> phases, std::span<const double> rates,
                     std::span<const double> weights, int degree, ErrorModel model)
{
    const auto n = static_cast<Eigen::Index>(phases.size());
    if (degree < 0)
        throw InvalidArgument("fit_trig: degree must be >= 0");
    if (rates.size() != phases.size() || weights.size() != phases.size())
        throw InvalidArgument("fit_trig: phases, rates and weights must have equal length");
    const Eigen::Index params = 2 * degree + 1;
    if (n < params)
        throw InvalidArgument("fit_trig: need at least 2N+1 samples");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw InvalidArgument("fit_trig: weights must be positive and finite");

    Eigen::MatrixXd design(n, params);
    Eigen::VectorXd y(n), sqrt_w(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        design(i, 0) = 1.0;
        for (int k = 1; k <= degree; ++k)
        {
            design(i, 2 * k - 1) = std::cos(k * phases[i]);
            design(i, 2 * k) = std::sin(k * phases[i]);
        }
        y[i] = rates[i];
        sqrt_w[i] = std::sqrt(weights[i]);
    }
    const Eigen::MatrixXd aw = sqrt_w.asDiagonal() * design;
    const Eigen::VectorXd yw = sqrt_w.asDiagonal() * y;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.maxCoeff(), smin = sv.minCoeff();
    if (!(smin > 0.0) || smax / smin > kMaxCondition)
        throw ConditioningError("fit_trig: design matrix is rank deficient (condition number " +
                                std::to_string(smin > 0.0 ? smax / smin : INFINITY) +
                                "); the phase grid cannot separate frequencies 0.." + std::to_string(degree));
    const Eigen::VectorXd coef = svd.solve(yw);

    TrigFit fit;
    fit.degree = degree;
    fit.c0 = coef[0];
    fit.a.resize(degree);
    fit.b.resize(degree);
    for (int k = 1; k <= degree; ++k)
    {
        fit.a[k - 1] = coef[2 * k - 1];
        fit.b[k - 1] = coef[2 * k];
    }
    const Eigen::VectorXd resid = y - design * coef;
    fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n));

    // (A^T W A)^-1 = V S^-2 V^T
    const Eigen::VectorXd inv_s2 = sv.array().square().inverse();
    fit.covariance = svd.matrixV() * inv_s2.asDiagonal() * svd.matrixV().transpose();
    if (model == ErrorModel::residual_scaled)
    {
        const double dof = static_cast<double>(n - params);
        const double chi2 = (sqrt_w.asDiagonal() * resid).squaredNorm();
        fit.covariance *= dof > 0 ? chi2 / dof : 0.0;
    }
    return fit;
}

} // namespace detail

/// Weighted least squares over {1, cos k phi, sin k phi : k = 1..N};
/// visibility is the frequency-N amplitude over the offset.
inline TrigFit fit_trig(std::span<const double> phases, std::span<const double> rates,
                        std::span<const double> weights, int degree,
                        ErrorModel model = ErrorModel::inverse_variance)
{
    TrigFit fit = detail::solve(phases, rates, weights, degree, model);
    if (degree == 0)
        return fit;
    if (!(fit.c0 >= kMinOffset))
        throw NumericalError("fit_trig: fitted offset c0 = " + std::to_string(fit.c0) +
                             " is below the floor; visibility is undefined");
    const double an = fit.a[degree - 1], bn = fit.b[degree - 1];
    const double amp = std::hypot(an, bn);
    fit.visibility = amp / fit.c0;

    const Eigen::Index ia = 2 * degree - 1, ib = 2 * degree;
    const auto& cov = fit.covariance;
    double var = 0.0;
    if (amp > 0.0)
    {
        Eigen::Vector3d g(-amp / (fit.c0 * fit.c0), an / (amp * fit.c0), bn / (amp * fit.c0));
        Eigen::Matrix3d c;
        c << cov(0, 0), cov(0, ia), cov(0, ib), cov(ia, 0), cov(ia, ia), cov(ia, ib), cov(ib, 0), cov(ib, ia),
            cov(ib, ib);
        var = g.dot(c * g);
    }
    else
    {
        // Gradient is undefined at zero amplitude; use the mean coefficient variance.
        var = 0.5 * (cov(ia, ia) + cov(ib, ib)) / (fit.c0 * fit.c0);
    }
    fit.sigma_visibility = std::sqrt(std::max(var, 0.0));
    return fit;
}

inline std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0); }

/// Inverse-variance Poisson weights 1 / max(count, floor).
inline std::vector<double> poisson_weights(std::span<const double> counts, double floor = 1.0)
{
    std::vector<double> w;
    w.reserve(counts.size());
    for (double c : counts)
        w.push_back(1.0 / std::max(c, floor));
    return w;
}

/// Local minima of the fitted degree-N trigonometric polynomial over [0, 2 pi),
/// located on a dense grid and polished by golden-section search.
inline std::vector<std::pair<double, double>> fringe_minima(const detection::CoincidenceCurve& curve,
                                                            int degree = -1)
{
    if (curve.phases.size() < 3)
        throw InvalidArgument("fringe_minima: need at least 3 samples");
    int n = degree >= 0 ? degree : curve.pattern.total();
    n = std::min<int>(n, static_cast<int>((curve.phases.size() - 1) / 2));
    const auto w = uniform_weights(curve.phases.size());
    const TrigFit fit = detail::solve(curve.phases, curve.rates, w, n, ErrorModel::residual_scaled);

    double scale = std::abs(fit.c0);
    double harmonic = 0.0;
    for (int k = 1; k <= n; ++k)
        harmonic = std::max(harmonic, fit.amplitude(k));
    std::vector<std::pair<double, double>> out;
    if (n == 0 || harmonic <= 1e-12 * std::max(scale, 1e-300))
        return out;

    const double two_pi = 2.0 * std::numbers::pi;
    const int dense = std::max(64 * n, 512);
    const double h = two_pi / dense;
    std::vector<double> v(dense);
    for (int i = 0; i < dense; ++i)
        v[i] = fit(i * h);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < dense; ++i)
    {
        const double prev = v[(i + dense - 1) % dense], next = v[(i + 1) % dense];
        if (!(v[i] < prev && v[i] <= next))
            continue;
        double lo = (i - 1) * h, hi = (i + 1) * h;
        double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
        double f1 = fit(x1), f2 = fit(x2);
        while (hi - lo > 1e-12)
        {
            if (f1 <= f2)
            {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = fit(x1);
            }
            else
            {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = fit(x2);
            }
        }
        double x = std::fmod(0.5 * (lo + hi) + two_pi, two_pi);
        out.emplace_back(x, fit(x));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace noonlab::analysis
