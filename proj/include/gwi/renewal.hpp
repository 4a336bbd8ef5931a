// SPDX-License-Identifier: Apache-2.0
//
// Survival of the process stopped at zero, u_n = P(Z_1 > 0, ..., Z_n > 0 | Z_0 > 0),
// from the renewal system
//
//   u_n = d_n / κ0 + Σ_{k<n} a_k u_{n-1-k},   u_0 = 1
//   a_k = γ_k^{(0)} (1 - B(F_k(0))),   d_k = κ0 γ_k^{(0)} q_k^δ,
//
// with γ_k^{(0)} = ∏_{j<k} B(F_j(0)). Also: tail-regime classification,
// the asymptotics of γ_n^{(0)}, and power-law fitting of u.
#pragma once

#include "gwi/laws.hpp"

#include <Eigen/Core>

#include <limits>
#include <map>
#include <string>
#include <vector>

namespace gwi {

struct RenewalTable {
    Eigen::ArrayXd gamma0;  // γ_k^{(0)}
    Eigen::ArrayXd a;       // γ_k^{(0)} - γ_{k+1}^{(0)}
    Eigen::ArrayXd d;       // γ_k^{(0)} - γ_k
    Eigen::ArrayXd u;
    Eigen::ArrayXd q;       // q_k = 1 - F_k(0)
    double kappa0 = 1.0;

    Eigen::Index n_max() const noexcept { return u.size() - 1; }
};

enum class RenewalMethod { Auto, Direct, Fft };

/// Direct O(n²) convolution for Direct; online divide-and-conquer FFT
/// convolution, O(n log² n), for Fft. Auto switches to Fft above 10^4.
RenewalTable build_renewal(const LawParams& params, Eigen::Index n_max,
                           RenewalMethod method = RenewalMethod::Auto);

enum class Regime { R0, R1, R2, R3, R4, R5, R6, Uncovered };
enum class Correction { None, Log, InverseLog };

const char* to_string(Regime r) noexcept;
const char* to_string(Correction c) noexcept;

inline constexpr double kRegimeTol = 1e-9;

struct RegimeReport {
    Regime regime_id = Regime::Uncovered;
    double alpha = std::numeric_limits<double>::quiet_NaN();  // u_n ≈ n^{-α} L(n)
    Correction correction = Correction::None;
    double sigma = 0;
    double fitted_alpha = std::numeric_limits<double>::quiet_NaN();
    std::map<std::string, double> constants;
};

/// Pure function of the comparisons θ vs ν, σ vs 1, σ + δ/ν vs 1 and
/// δ vs ν. Values within `tol` (relative) of a boundary are routed to the
/// boundary case.
RegimeReport classify_regime(const LawParams& params, double tol = kRegimeTol);

struct TailFit {
    double fitted_alpha = 0;        // under the regime's slowly varying correction
    Correction verdict = Correction::None;  // correction with the smallest residual
    double rss_none = 0, rss_log = 0, rss_inverse_log = 0;
    double alpha_none = 0, alpha_log = 0, alpha_inverse_log = 0;
    double constant = 0;            // u_N n^α / L(N)
    double drift = 0;               // relative change of u_n n^α / L(n) over [N/10, N]
};

/// Least squares of log u_n - c log log n on log n over the last decade
/// for c ∈ {0, 1, -1}. Needs u of length >= 1000 (InsufficientLength).
TailFit fit_tail(const Eigen::Ref<const Eigen::ArrayXd>& u, const RegimeReport& regime);

/// Same, also filling regime.fitted_alpha and regime.constants["K"].
TailFit fit_tail_into(const Eigen::Ref<const Eigen::ArrayXd>& u, RegimeReport& regime);

enum class GammaCase { Convergent, PowerLaw, Stretched };  // θ > ν, θ = ν, θ < ν

struct GammaAsymptotics {
    GammaCase kind = GammaCase::PowerLaw;
    Eigen::Index n_max = 0;
    double gamma_n = 0;          // γ_{n_max}^{(0)}
    // θ > ν
    double c0 = 0;               // γ_{n_max}^{(0)} times the asymptotic tail factor
    double cauchy = 0;           // |γ_{n_max}^{(0)} - γ_{n_max/2}^{(0)}|
    // θ = ν
    double c1 = 0;               // γ_n^{(0)} n^σ at n_max
    double c1_drift = 0;         // relative change of γ_n^{(0)} n^σ over [n_max/10, n_max]
    // θ < ν
    double slope = 0;            // fitted slope of -log γ_n^{(0)} against n^{1-θ/ν}
    double c2 = 0;               // κ1^{-θ/ν} κ2 ν^{1-θ/ν} / (ν - θ)
    double c2_rel_error = 0;
};

GammaAsymptotics gamma_asymptotics(const LawParams& params, Eigen::Index n_max);

struct NamedParams {
    std::string name;
    LawParams params;
};

/// One parameter set per regime R0..R6, κ0 = 1.
std::vector<NamedParams> standard_regime_grid();

}  // namespace gwi
