// SPDX-License-Identifier: Apache-2.0
//
// Exact finite-n evaluation of the scaling limits of Z and of the process
// stopped at zero, next to their limit values.
#pragma once

#include "gwi/laws.hpp"
#include "gwi/renewal.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace gwi {

/// sup_{k≤n} |(1 + (k/n) t^ν)^σ γ_k^{(0)}(e^{-t q_n(0)}) - 1|; needs θ = ν.
double check_thm41(const LawParams& params, double t, Eigen::Index n);
/// sup_{k≤n} |e^{κ2 t^θ k/n} γ_k^{(0)}(e^{-t n^{-1/θ}}) - 1|; needs θ < ν.
double check_thm43(const LawParams& params, double t, Eigen::Index n);
/// |E e^{-t q_n(0) Z_n} - (1 + t^ν)^{-σ}|; needs θ = ν.
double check_cor42(const LawParams& params, double t, Eigen::Index n);
/// |E e^{-t Z_n / n^{1/θ}} - e^{-κ2 t^θ}|; needs θ < ν.
double check_cor44(const LawParams& params, double t, Eigen::Index n);

struct StationaryValue {
    double value = 0;  // midpoint of [lower, upper]
    double lower = 0;
    double upper = 0;
    Eigen::Index terms = 0;  // orbit length J summed explicitly
};

/// E s^ψ = ∏_{j≥0} B(F_j(s)) for θ > ν. The tail Σ_{j≥J} q_j^θ is bracketed
/// between integrals using κ1ν <= q_{j+1}^{-ν} - q_j^{-ν} <= κ1ν - Ξ(F_J(s));
/// J doubles until the bracket is narrower than tol (TolUnreachable past
/// max_terms).
StationaryValue stationary_pgf(const LawParams& params, double s, double tol = 1e-10,
                               Eigen::Index max_terms = Eigen::Index{1} << 27);

enum class Scaling { ByQn, ByNInvTheta };  // t = e^{-s q_n(0)} or t = e^{-s n^{-1/θ}}

/// E(t^{X_n} | X_n > 0) for the chain stopped at zero, as 1 - Ξ1 - Ξ2 with
///   Ξ1 = γ_n^{(0)}(t) q_n(t)^δ / u_n
///   Ξ2 = Σ_{k=1}^n (u_{n-k}/u_n) (γ_{k-1}^{(0)}(t) - γ_k^{(0)}(t))
/// and u the renewal survival conditioned on X_0 > 0. Throws MissingRenewal
/// if the table is shorter than n.
double conditional_laplace_exact(const LawParams& params, const RenewalTable& renewal, Eigen::Index n,
                                 double s, Scaling scaling);

/// e^{-κ2 s^θ}; needs θ < ν.
double limit_thm51(const LawParams& params, double s);

/// θ = ν. σ >= 1: (1 + s^ν)^{-σ}. σ < 1: Λ(s, δ, ν), where the branch
/// σ < 1 - δ/ν needs K5, the constant in P(ζ > n) ~ K5 n^{-δ/ν} for the
/// unconditioned chain (MissingK5 otherwise).
double limit_thm52(const LawParams& params, double s, std::optional<double> k5 = std::nullopt);

/// ∫_0^1 (1-x)^{-a} (1 + c x)^{-b} dx for a < 1, through y = (1-x)^{1-a}.
double singular_integral(double a, double b, double c, double tol = 1e-13);

struct K5Sensitivity {
    double value = 0;
    double k5_minus = 0;  // limit with K5 lowered by 5%
    double k5_plus = 0;   // ... raised by 5%
};
K5Sensitivity limit_thm52_sensitivity(const LawParams& params, double s, double k5);

enum class TheoremId { Thm41, Thm43, Cor42, Cor44, Thm51, Thm52a, Thm52b };

const char* to_string(TheoremId id) noexcept;
std::optional<TheoremId> parse_theorem(const std::string& s);

struct LimitCheck {
    TheoremId theorem_id = TheoremId::Thm51;
    std::vector<double> s_grid;
    std::vector<Eigen::Index> n_grid;
    Eigen::MatrixXd values;      // rows: n, columns: s
    std::vector<double> limits;  // per s
    Eigen::MatrixXd deviations;  // |values - limits|
    std::optional<double> k5;    // used for Thm52b
    std::vector<K5Sensitivity> k5_sensitivity;

    /// Deviations nonincreasing down each column.
    bool monotone() const;
    double max_deviation_at_last_n() const;
};

/// Tabulates |finite-n value - limit| for each (n, s). For Thm41/Thm43 the
/// value is the sup-deviation itself and the limit 0. Thm51/Thm52* build
/// the renewal table internally (or use `renewal` when given and long
/// enough); Thm52b with σ < 1 - δ/ν takes K5 from `k5` or, if absent, from
/// a tail fit of the renewal survival.
LimitCheck convergence_sweep(const LawParams& params, TheoremId id, const std::vector<double>& s_grid,
                             const std::vector<Eigen::Index>& n_grid, std::optional<double> k5 = std::nullopt,
                             const RenewalTable* renewal = nullptr);

/// K5 for the unconditioned chain, κ0 · lim u_n n^{δ/ν}, from a tail fit of
/// the renewal survival up to n_max.
double estimate_k5(const LawParams& params, Eigen::Index n_max = 100000);

}  // namespace gwi
