#pragma once
/// \file optics.hpp
/// Beamsplitter and phase-shifter action on two-mode Fock states.
///
/// Mode convention (symmetric-real):
///   a^dag -> sqrt(T) c^dag + sqrt(1-T) d^dag
///   b^dag -> sqrt(1-T) c^dag - sqrt(T) d^dag
/// The unitary conserves total photon number, so it acts block-diagonally;
/// block N maps |n, N-n> to the output basis |k, N-k>.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "noonlab/errors.hpp"
#include "noonlab/fock.hpp"

namespace noonlab::optics
{

using fock::TwoModeState;

struct BeamsplitterSpec
{
    enum class Convention
    {
        symmetric_real,
    };

    double transmissivity = 0.5; ///< intensity transmission T in [0, 1]
    Convention convention = Convention::symmetric_real;

    void validate() const
    {
        if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
            throw InvalidArgument("beamsplitter transmissivity must lie in [0, 1]");
    }

    /// 2x2 matrix M with (c^dag, d^dag)^T-coefficients: a^dag = M(0,0) c^dag + M(0,1) d^dag, ...
    Eigen::Matrix2d mode_matrix() const
    {
        const double t = std::sqrt(transmissivity), s = std::sqrt(1.0 - transmissivity);
        Eigen::Matrix2d m;
        m << t, s, s, -t;
        return m;
    }
};

struct FockBSBlock
{
    int n = 0;
    Eigen::MatrixXcd matrix; ///< (n+1)x(n+1); column = input |j, n-j>, row = output |k, n-k>
};

enum class Mode
{
    first,
    second,
};

namespace detail
{

/// Real blocks 0..N for one transmissivity, grown on demand by the ladder
/// recurrence U|n,m> = (A^dag / sqrt(n)) U|n-1,m>, U|0,m> = (B^dag / sqrt(m)) U|0,m-1>.
/// Every step is a weighted sum of non-cancelling neighbours, so the blocks
/// stay accurate far past where explicit factorial sums lose all digits.
class BlockLadder
{
public:
    explicit BlockLadder(double transmissivity)
        : t_(std::sqrt(transmissivity)), s_(std::sqrt(1.0 - transmissivity))
    {
        blocks_.push_back(Eigen::MatrixXd::Identity(1, 1));
    }

    const Eigen::MatrixXd& get(int n) const { return blocks_.at(static_cast<std::size_t>(n)); }
    int size() const { return static_cast<int>(blocks_.size()); }

    /// Blocks above this size come from the spectral route; the ladder
    /// amplifies rounding by up to sqrt(C(n, n/2)).
    static constexpr int kLadderMax = 16;

    void grow_to(int n_max)
    {
        while (static_cast<int>(blocks_.size()) <= n_max)
        {
            const int n = static_cast<int>(blocks_.size());
            if (n > kLadderMax)
            {
                blocks_.push_back(spectral_block(n));
                continue;
            }
            const Eigen::MatrixXd& prev = blocks_.back();
            Eigen::MatrixXd cur = Eigen::MatrixXd::Zero(n + 1, n + 1);
            // Column 0: add a photon to input mode b.
            {
                const double inv = 1.0 / std::sqrt(static_cast<double>(n));
                for (int k = 0; k <= n; ++k)
                {
                    double v = 0.0;
                    if (k >= 1)
                        v += s_ * std::sqrt(static_cast<double>(k)) * prev(k - 1, 0);
                    if (k <= n - 1)
                        v -= t_ * std::sqrt(static_cast<double>(n - k)) * prev(k, 0);
                    cur(k, 0) = v * inv;
                }
            }
            // Columns j >= 1: add a photon to input mode a.
            for (int j = 1; j <= n; ++j)
            {
                const double inv = 1.0 / std::sqrt(static_cast<double>(j));
                for (int k = 0; k <= n; ++k)
                {
                    double v = 0.0;
                    if (k >= 1)
                        v += t_ * std::sqrt(static_cast<double>(k)) * prev(k - 1, j - 1);
                    if (k <= n - 1)
                        v += s_ * std::sqrt(static_cast<double>(n - k)) * prev(k, j - 1);
                    cur(k, j) = v * inv;
                }
            }
            blocks_.push_back(std::move(cur));
        }
    }

private:
    // U = P exp(theta K) with K = a^dag b - b^dag a, cos theta = sqrt(T) and
    // P = (-1)^(N-k) on output rows. K is antisymmetric tridiagonal, so
    // exp(theta K)_kj = i^(k-j) [Q exp(-i theta L) Q^T]_kj where Q L Q^T is
    // the symmetric tridiagonal matrix with the same off-diagonal.
    Eigen::MatrixXd spectral_block(int n) const
    {
        const double theta = std::atan2(s_, t_);
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(n + 1), sub(n);
        for (int k = 0; k < n; ++k)
            sub[k] = std::sqrt((k + 1.0) * (n - k));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub);
        const Eigen::MatrixXd& q = es.eigenvectors();
        const Eigen::VectorXd& lam = es.eigenvalues();
        const Eigen::ArrayXd c = (theta * lam.array()).cos(), sn = (theta * lam.array()).sin();
        // Q e^{-i theta L} Q^T split into real and imaginary parts
        const Eigen::MatrixXd re = q * c.matrix().asDiagonal() * q.transpose();
        const Eigen::MatrixXd im = -(q * sn.matrix().asDiagonal() * q.transpose());
        Eigen::MatrixXd out(n + 1, n + 1);
        for (int k = 0; k <= n; ++k)
            for (int j = 0; j <= n; ++j)
            {
                // real part of i^(k-j) (re + i im)
                const int d = ((k - j) % 4 + 4) % 4;
                double v = d == 0 ? re(k, j) : d == 1 ? -im(k, j) : d == 2 ? -re(k, j) : im(k, j);
                out(k, j) = ((n - k) % 2) ? -v : v;
            }
        return out;
    }

    double t_, s_;
    std::vector<Eigen::MatrixXd> blocks_;
};

/// Process-wide cache of block ladders keyed by transmissivity.
class BlockCache
{
public:
    static BlockCache& instance()
    {
        static BlockCache cache;
        return cache;
    }

    /// Returns a ladder holding at least blocks 0..n_max. Ladders are only
    /// appended to under the exclusive lock and returned as shared snapshots.
    std::shared_ptr<const BlockLadder> ladder(double transmissivity, int n_max)
    {
        {
            std::shared_lock lock(mutex_);
            auto it = ladders_.find(transmissivity);
            if (it != ladders_.end() && it->second->size() > n_max)
                return it->second;
        }
        std::unique_lock lock(mutex_);
        auto& slot = ladders_[transmissivity];
        if (!slot || slot->size() <= n_max)
        {
            auto next = slot ? std::make_shared<BlockLadder>(*slot)
                             : std::make_shared<BlockLadder>(transmissivity);
            next->grow_to(std::max(n_max, 2 * (slot ? slot->size() : 0)));
            slot = std::move(next);
        }
        return slot;
    }

private:
    std::shared_mutex mutex_;
    std::map<double, std::shared_ptr<const BlockLadder>> ladders_;
};

} // namespace detail

inline FockBSBlock bs_block(int n, const BeamsplitterSpec& spec)
{
    if (n < 0)
        throw InvalidArgument("bs_block: photon number must be >= 0");
    spec.validate();
    auto ladder = detail::BlockCache::instance().ladder(spec.transmissivity, n);
    return {n, ladder->get(n).cast<Complex>()};
}

/// Applies the beamsplitter. The result has cutoff max(cutoff, total_cap) so
/// every output |k, N-k> fits without clipping.
inline TwoModeState apply_bs(const TwoModeState& state, const BeamsplitterSpec& spec)
{
    spec.validate();
    const int cap = state.total_cap;
    if (cap > 2 * state.cutoff || cap < 0)
        throw InvalidArgument("apply_bs: inconsistent total photon cap");
    auto ladder = detail::BlockCache::instance().ladder(spec.transmissivity, cap);

    TwoModeState out = TwoModeState::zero(std::max(state.cutoff, cap), cap);
    out.deficit_a = state.deficit_a;
    out.deficit_b = state.deficit_b;

    Eigen::VectorXcd in_vec;
    Eigen::VectorXd out_re, out_im;
    for (int n = 0; n <= cap; ++n)
    {
        // Input support in this block: n_a in [lo, hi] with n_b = n - n_a <= cutoff.
        const int lo = std::max(0, n - state.cutoff);
        const int hi = std::min(n, state.cutoff);
        if (lo > hi)
            continue;
        in_vec.resize(hi - lo + 1);
        for (int j = lo; j <= hi; ++j)
            in_vec[j - lo] = state.amps(j, n - j);
        if (in_vec.squaredNorm() == 0.0)
            continue;
        const auto cols = ladder->get(n).middleCols(lo, hi - lo + 1);
        out_re.noalias() = cols * in_vec.real();
        out_im.noalias() = cols * in_vec.imag();
        for (int k = 0; k <= n; ++k)
            out.amps(k, n - k) = Complex(out_re[k], out_im[k]);
    }
    return out;
}

/// Multiplies amps(n_a, n_b) by exp(i n phi), n the photon number of `mode`.
inline TwoModeState apply_phase(const TwoModeState& state, double phi, Mode mode = Mode::second)
{
    TwoModeState out = state;
    const int dim = state.cutoff + 1;
    Eigen::VectorXcd phases(dim);
    for (int n = 0; n < dim; ++n)
        phases[n] = std::polar(1.0, phi * n);
    if (mode == Mode::first)
        out.amps = phases.asDiagonal() * state.amps;
    else
        out.amps = state.amps * phases.asDiagonal();
    return out;
}

/// First beamsplitter, phase phi on the second arm, second beamsplitter.
inline TwoModeState mz_pipeline(const fock::SourceSpec& source, const BeamsplitterSpec& bs, double phi,
                                const fock::TruncationPolicy& policy = {})
{
    return apply_bs(apply_phase(apply_bs(fock::build_input(source, policy), bs), phi, Mode::second), bs);
}

/// P(n_c, n_d) = |amps|^2.
inline Eigen::MatrixXd joint_number_distribution(const TwoModeState& state)
{
    return state.amps.cwiseAbs2();
}

} // namespace noonlab::optics
