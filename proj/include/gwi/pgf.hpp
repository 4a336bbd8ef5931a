// SPDX-License-Identifier: Apache-2.0
//
// Iteration of the offspring p.g.f. in the variable q = 1 - s:
//
//   q_{j+1} = q_j (1 - κ1 q_j^ν),   q_j = 1 - F_j(t)
//
// which is exact algebra for F(s) = s + κ1 (1-s)^{1+ν} and never forms
// 1 - (something close to 1). Every derived sequence (products of B along
// the orbit, H_n, the gap diagnostics) is built from q.
#pragma once

#include "gwi/laws.hpp"
#include "gwi/numerics.hpp"

#include <Eigen/Core>

#include <cmath>

namespace gwi {

template <typename Scalar = double>
using SeqX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
struct QTrajectory {
    Scalar t = 0;  // evaluation point, t = 1 - q[0]
    SeqX<Scalar> q;

    Eigen::Index horizon() const noexcept { return q.size() - 1; }
};

/// q_0..q_n started from q_0 = q0. Use this form when 1 - t is itself
/// known more accurately than t (Laplace arguments t = e^{-λ}).
template <typename Scalar = double>
QTrajectory<Scalar> q_iterate_from(const LawParams& p, Scalar q0, Eigen::Index n) {
    QTrajectory<Scalar> tr;
    tr.t = Scalar(1) - q0;
    tr.q.resize(n + 1);
    tr.q[0] = q0;
    const Scalar k1 = p.kappa1, nu = p.nu;
    Scalar q = q0;
    for (Eigen::Index j = 1; j <= n; ++j) {
        q = nu == Scalar(1) ? q * (Scalar(1) - k1 * q) : q * (Scalar(1) - k1 * std::pow(q, nu));
        tr.q[j] = q;
    }
    return tr;
}

template <typename Scalar = double>
QTrajectory<Scalar> q_iterate(const LawParams& p, Scalar t, Eigen::Index n) {
    return q_iterate_from<Scalar>(p, Scalar(1) - t, n);
}

/// Starting point q_0 = 1 - e^{-λ} without cancellation.
template <typename Scalar = double>
Scalar laplace_q0(Scalar lambda) {
    return -std::expm1(-lambda);
}

namespace detail {
// Below this x = κ1 q^ν the power series are used; above it the closed
// forms through log1p / expm1 lose at most a couple of digits.
inline constexpr double kSeriesCut = 0.25;
inline constexpr int kSeriesTerms = 64;
}  // namespace detail

/// Ξ as a function of q = 1 - s:
///   Ξ = κ1ν - [(q(1-x))^{-ν} - q^{-ν}],  x = κ1 q^ν
///     = -κ1 f(x),  f(x) = ((1-x)^{-ν} - 1)/x - ν = Σ_{k≥2} e_k x^{k-1}
/// where e_k are the coefficients of (1-x)^{-ν}.
template <typename Scalar = double>
Scalar xi_q(const LawParams& p, Scalar q) {
    const Scalar nu = p.nu, k1 = p.kappa1;
    const Scalar x = k1 * std::pow(q, nu);
    if (x == Scalar(0)) return Scalar(0);
    Scalar f;
    if (x < Scalar(detail::kSeriesCut)) {
        Scalar e = nu * (nu + 1) / 2;  // e_2
        Scalar xp = x;
        CompensatedSum<Scalar> acc;
        for (int k = 2; k < detail::kSeriesTerms + 2; ++k) {
            const Scalar term = e * xp;
            acc.add(term);
            if (term < std::numeric_limits<Scalar>::epsilon() * acc.value() * Scalar(1e-2)) break;
            e *= (nu + k) / Scalar(k + 1);
            xp *= x;
        }
        f = acc.value();
    } else {
        f = std::expm1(-nu * std::log1p(-x)) / x - nu;
    }
    return -k1 * f;
}

/// Θ as a function of q = 1 - t:
///   Θ = κ1ν - [q^ν - (q(1-x))^ν] / (q(1-x))^{2ν}
///     = -κ1 (A - νB)/B,  A = (1 - (1-x)^ν)/x,  B = (1-x)^{2ν}.
template <typename Scalar = double>
Scalar theta_q(const LawParams& p, Scalar q) {
    const Scalar nu = p.nu, k1 = p.kappa1;
    const Scalar x = k1 * std::pow(q, nu);
    if (x == Scalar(0)) return Scalar(0);
    const Scalar b = std::exp(2 * nu * std::log1p(-x));
    Scalar diff;  // A - νB
    if (x < Scalar(detail::kSeriesCut)) {
        Scalar alpha = nu;  // coefficient of x^k in A, starting at k = 0
        Scalar beta = 1;    // coefficient of x^k in B
        Scalar xp = 1;
        CompensatedSum<Scalar> acc;
        for (int k = 0; k < detail::kSeriesTerms; ++k) {
            if (k > 0) {
                const Scalar term = (alpha - nu * beta) * xp;
                acc.add(term);
                if (std::abs(term) < std::numeric_limits<Scalar>::epsilon() * std::abs(acc.value()) * Scalar(1e-2))
                    break;
            }
            alpha *= (Scalar(k + 1) - nu) / Scalar(k + 2);
            beta *= (Scalar(k) - 2 * nu) / Scalar(k + 1);
            xp *= x;
        }
        diff = acc.value();
    } else {
        const Scalar a = -std::expm1(nu * std::log1p(-x)) / x;
        diff = a - nu * b;
    }
    return -k1 * diff / b;
}

template <typename Scalar = double>
Scalar xi_func(const LawParams& p, Scalar t) { return xi_q<Scalar>(p, Scalar(1) - t); }
template <typename Scalar = double>
Scalar theta_func(const LawParams& p, Scalar t) { return theta_q<Scalar>(p, Scalar(1) - t); }

/// Υ_n = Σ_{i<n} Ξ(F_i(t)) = κ1νn - (q_n^{-ν} - q_0^{-ν}), summed term by
/// term so no large quantities are subtracted.
template <typename Scalar = double>
Scalar upsilon_sum(const LawParams& p, const QTrajectory<Scalar>& tr, Eigen::Index n) {
    CompensatedSum<Scalar> acc;
    for (Eigen::Index i = 0; i < n; ++i) acc.add(xi_q<Scalar>(p, tr.q[i]));
    return acc.value();
}

/// Υ_n(t)/n = κ1ν - [q_n^{-ν} - (1-t)^{-ν}]/n.
inline double theorem21_gap(const LawParams& p, double t, Eigen::Index n) {
    using L = long double;
    const auto tr = q_iterate<L>(p, static_cast<L>(t), n);
    return static_cast<double>(upsilon_sum<L>(p, tr, n) / static_cast<L>(n));
}

/// ε(n,t) = q_n^ν (κ1νn + (1-t)^{-ν}) - 1, evaluated as q_n^ν Υ_n.
inline double epsilon_nt(const LawParams& p, double t, Eigen::Index n) {
    using L = long double;
    const auto tr = q_iterate<L>(p, static_cast<L>(t), n);
    return static_cast<double>(std::pow(tr.q[n], static_cast<L>(p.nu)) * upsilon_sum<L>(p, tr, n));
}

/// The same ε from its defining formula; the two agree while q_n is
/// well above roundoff.
inline double epsilon_nt_direct(const LawParams& p, double t, Eigen::Index n) {
    using L = long double;
    const auto tr = q_iterate<L>(p, static_cast<L>(t), n);
    const L nu = p.nu;
    return static_cast<double>(std::pow(tr.q[n], nu) *
                                   (static_cast<L>(p.kappa1) * nu * static_cast<L>(n) +
                                    std::pow(static_cast<L>(1) - static_cast<L>(t), -nu)) -
                               1);
}

template <typename Scalar = double>
struct GammaSequence {
    Scalar s = 0;
    SeqX<Scalar> log_gamma0;  // log γ_k^{(0)}(s), k = 0..n
    SeqX<Scalar> gamma;       // γ_k(s) = (1 - κ0 q_k^δ) γ_k^{(0)}(s)

    Scalar gamma0(Eigen::Index k) const { return std::exp(log_gamma0[k]); }
};

/// log γ_k^{(0)} = -κ2 Σ_{j<k} q_j^θ along a precomputed orbit.
template <typename Scalar = double>
GammaSequence<Scalar> gamma_from_q(const LawParams& p, const QTrajectory<Scalar>& tr) {
    const Eigen::Index n = tr.horizon();
    GammaSequence<Scalar> g;
    g.s = tr.t;
    g.log_gamma0.resize(n + 1);
    g.gamma.resize(n + 1);
    const Scalar theta = p.theta, delta = p.delta, k0 = p.kappa0, k2 = p.kappa2;
    CompensatedSum<Scalar> acc;
    for (Eigen::Index k = 0; k <= n; ++k) {
        g.log_gamma0[k] = -k2 * acc.value();
        const Scalar qk = tr.q[k];
        g.gamma[k] = (Scalar(1) - k0 * std::pow(qk, delta)) * std::exp(g.log_gamma0[k]);
        acc.add(theta == Scalar(1) ? qk : std::pow(qk, theta));
    }
    return g;
}

template <typename Scalar = double>
GammaSequence<Scalar> gamma_sequences(const LawParams& p, Scalar s, Eigen::Index n) {
    return gamma_from_q<Scalar>(p, q_iterate<Scalar>(p, s, n));
}

/// H_n(s) = E s^{Z_n} = G0(F_n(s)) ∏_{j<n} B(F_j(s)), from the orbit q.
template <typename Scalar = double>
Scalar h_from_q(const LawParams& p, const QTrajectory<Scalar>& tr) {
    return gamma_from_q<Scalar>(p, tr).gamma[tr.horizon()];
}

inline double h_n(const LawParams& p, double s, Eigen::Index n) {
    return h_from_q<double>(p, q_iterate<double>(p, s, n));
}

/// E e^{-λ Z_n} = H_n(e^{-λ}).
inline double laplace_zn(const LawParams& p, double lambda, Eigen::Index n) {
    return h_from_q<double>(p, q_iterate_from<double>(p, laplace_q0(lambda), n));
}

}  // namespace gwi
