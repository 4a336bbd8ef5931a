// SPDX-License-Identifier: Apache-2.0
#include "gwi/limits.hpp"
#include "gwi/errors.hpp"
#include "gwi/numerics.hpp"
#include "gwi/pgf.hpp"

#include <algorithm>
#include <cmath>

namespace gwi {

namespace {

// -1, 0, +1 for θ < ν, θ = ν, θ > ν under the regime tolerance.
int theta_vs_nu(const LawParams& p) {
    if (std::abs(p.theta - p.nu) <= kRegimeTol * std::max({1.0, p.theta, p.nu})) return 0;
    return p.theta < p.nu ? -1 : 1;
}

void require(bool ok, const char* what) {
    if (!ok) throw NumericError(ErrorCode::WrongRegime, what);
}

void require_n(Eigen::Index n) {
    if (n < 1) throw NumericError(ErrorCode::InvalidArgument, "n must be >= 1");
}

double qn_at_zero(const LawParams& p, Eigen::Index n) { return q_iterate<double>(p, 0.0, n).q[n]; }

// Running log γ_k^{(0)} along the orbit from q0, k = 0..n, reported to visit(k, log γ_k, q_k).
template <class Visit>
void walk_gamma0(const LawParams& p, double q0, Eigen::Index n, Visit&& visit) {
    const auto tr = q_iterate_from<double>(p, q0, n);
    CompensatedSum<> acc;
    for (Eigen::Index k = 0; k <= n; ++k) {
        visit(k, -p.kappa2 * acc.value(), tr.q[k]);
        acc.add(std::pow(tr.q[k], p.theta));
    }
}

double h_at(const LawParams& p, double q0, Eigen::Index n) {
    return h_from_q<double>(p, q_iterate_from<double>(p, q0, n));
}

}  // namespace

double check_thm41(const LawParams& p, double t, Eigen::Index n) {
    require(theta_vs_nu(p) == 0, "the uniform power-law limit of γ needs θ = ν");
    require_n(n);
    const double sig = p.sigma();
    const double tn = std::pow(t, p.nu);
    double worst = 0.0;
    walk_gamma0(p, laplace_q0(t * qn_at_zero(p, n)), n, [&](Eigen::Index k, double lg, double) {
        const double e = sig * std::log1p(static_cast<double>(k) / static_cast<double>(n) * tn) + lg;
        worst = std::max(worst, std::abs(std::expm1(e)));
    });
    return worst;
}

double check_thm43(const LawParams& p, double t, Eigen::Index n) {
    require(theta_vs_nu(p) < 0, "the uniform exponential limit of γ needs θ < ν");
    require_n(n);
    const double rate = p.kappa2 * std::pow(t, p.theta);
    const double scale = std::pow(static_cast<double>(n), -1.0 / p.theta);
    double worst = 0.0;
    walk_gamma0(p, laplace_q0(t * scale), n, [&](Eigen::Index k, double lg, double) {
        const double e = rate * static_cast<double>(k) / static_cast<double>(n) + lg;
        worst = std::max(worst, std::abs(std::expm1(e)));
    });
    return worst;
}

double check_cor42(const LawParams& p, double t, Eigen::Index n) {
    require(theta_vs_nu(p) == 0, "the (1 + t^ν)^{-σ} limit needs θ = ν");
    require_n(n);
    const double limit = std::pow(1.0 + std::pow(t, p.nu), -p.sigma());
    return std::abs(h_at(p, laplace_q0(t * qn_at_zero(p, n)), n) - limit);
}

double check_cor44(const LawParams& p, double t, Eigen::Index n) {
    require(theta_vs_nu(p) < 0, "the e^{-κ2 t^θ} limit needs θ < ν");
    require_n(n);
    const double limit = std::exp(-p.kappa2 * std::pow(t, p.theta));
    const double scale = std::pow(static_cast<double>(n), -1.0 / p.theta);
    return std::abs(h_at(p, laplace_q0(t * scale), n) - limit);
}

StationaryValue stationary_pgf(const LawParams& p, double s, double tol, Eigen::Index max_terms) {
    require(theta_vs_nu(p) > 0, "a stationary limit needs θ > ν");
    if (!(s >= 0.0 && s <= 1.0)) throw NumericError(ErrorCode::InvalidArgument, "s must lie in [0, 1]");
    StationaryValue out;
    if (s == 1.0) {
        out.value = out.lower = out.upper = 1.0;
        return out;
    }
    using L = long double;
    const L nu = p.nu, theta = p.theta, k1 = p.kappa1;
    const double ratio = p.theta / p.nu;
    const double c_lo = p.kappa1 * p.nu;
    L q = 1.0L - static_cast<L>(s);
    CompensatedSum<L> head;
    Eigen::Index j = 0;
    for (Eigen::Index target = 1024;; target *= 2) {
        for (; j < target; ++j) {
            head.add(std::pow(q, theta));
            q *= 1.0L - k1 * std::pow(q, nu);
        }
        // q is now q_J with J = target.
        const double a = static_cast<double>(std::pow(q, -nu));
        const double c_hi = c_lo - xi_q<double>(p, static_cast<double>(q));
        const double t_lo = std::pow(a, 1.0 - ratio) / (c_hi * (ratio - 1.0));
        const double t_hi = std::pow(a, -ratio) + std::pow(a, 1.0 - ratio) / (c_lo * (ratio - 1.0));
        const double sum = static_cast<double>(head.value());
        out.lower = std::exp(-p.kappa2 * (sum + t_hi));
        out.upper = std::exp(-p.kappa2 * (sum + t_lo));
        out.value = 0.5 * (out.lower + out.upper);
        out.terms = j;
        if (out.upper - out.lower <= tol) return out;
        if (target >= max_terms)
            throw NumericError(ErrorCode::TolUnreachable,
                               "tail bracket still " + std::to_string(out.upper - out.lower) + " wide after " +
                                   std::to_string(j) + " terms");
    }
}

double conditional_laplace_exact(const LawParams& p, const RenewalTable& r, Eigen::Index n, double s,
                                 Scaling scaling) {
    require_n(n);
    if (r.u.size() <= n || r.q.size() <= n)
        throw NumericError(ErrorCode::MissingRenewal,
                           "renewal table ends at n = " + std::to_string(r.n_max()) + ", need " + std::to_string(n));
    if (s == 0.0) return 1.0;
    const double scale =
        scaling == Scaling::ByQn ? r.q[n] : std::pow(static_cast<double>(n), -1.0 / p.theta);
    const auto tr = q_iterate_from<double>(p, laplace_q0(s * scale), n);
    const double un = r.u[n];
    CompensatedSum<> xi2;
    CompensatedSum<> acc;  // Σ_{j<k} q_j(t)^θ
    for (Eigen::Index k = 1; k <= n; ++k) {
        const double qk1 = std::pow(tr.q[k - 1], p.theta);
        // γ_{k-1}^{(0)}(t) - γ_k^{(0)}(t) = γ_{k-1}^{(0)}(t) (1 - e^{-κ2 q_{k-1}^θ})
        const double drop = std::exp(-p.kappa2 * acc.value()) * -std::expm1(-p.kappa2 * qk1);
        xi2.add(r.u[n - k] / un * drop);
        acc.add(qk1);
    }
    const double xi1 = std::exp(-p.kappa2 * acc.value()) * std::pow(tr.q[n], p.delta) / un;
    return 1.0 - xi1 - xi2.value();
}

double limit_thm51(const LawParams& p, double s) {
    require(theta_vs_nu(p) < 0, "the e^{-κ2 s^θ} limit needs θ < ν");
    return std::exp(-p.kappa2 * std::pow(s, p.theta));
}

double singular_integral(double a, double b, double c, double tol) {
    if (!(a < 1.0)) throw NumericError(ErrorCode::InvalidArgument, "singular exponent must be < 1");
    const double r = 1.0 / (1.0 - a);
    // x = 1 - y^r, so 1 - x = y^r and (1-x)^{-a} dx = -r dy.
    auto g = [&](double y) {
        const double x = y <= 0.0 ? 1.0 : -std::expm1(r * std::log(y));
        return std::pow(1.0 + c * x, -b);
    };
    return r * tanh_sinh_01(g, tol);
}

double limit_thm52(const LawParams& p, double s, std::optional<double> k5) {
    const RegimeReport reg = classify_regime(p);
    require(theta_vs_nu(p) == 0, "the θ = ν conditional limits need θ = ν");
    const double sig = reg.sigma;
    const double sn = std::pow(s, p.nu);
    if (reg.regime_id == Regime::R1 || reg.regime_id == Regime::R2) return std::pow(1.0 + sn, -sig);
    const double dn = p.delta / p.nu;
    if (reg.regime_id == Regime::R5) {
        if (!k5) throw NumericError(ErrorCode::MissingK5, "the branch σ < 1 - δ/ν needs the constant K5");
        const double lead = p.kappa0 / *k5 * std::pow(1.0 / (p.kappa1 * p.nu), dn) * std::pow(s, p.delta) /
                            std::pow(1.0 + sn, sig + dn);
        return 1.0 - lead - sig * sn * singular_integral(dn, sig + 1.0, sn);
    }
    // R3, R4: σ >= 1 - δ/ν
    return 1.0 - sig * sn * singular_integral(1.0 - sig, sig + 1.0, sn);
}

K5Sensitivity limit_thm52_sensitivity(const LawParams& p, double s, double k5) {
    return {limit_thm52(p, s, k5), limit_thm52(p, s, 0.95 * k5), limit_thm52(p, s, 1.05 * k5)};
}

const char* to_string(TheoremId id) noexcept {
    switch (id) {
        case TheoremId::Thm41: return "thm41";
        case TheoremId::Thm43: return "thm43";
        case TheoremId::Cor42: return "cor42";
        case TheoremId::Cor44: return "cor44";
        case TheoremId::Thm51: return "thm51";
        case TheoremId::Thm52a: return "thm52a";
        case TheoremId::Thm52b: return "thm52b";
    }
    return "?";
}

std::optional<TheoremId> parse_theorem(const std::string& s) {
    for (TheoremId id : {TheoremId::Thm41, TheoremId::Thm43, TheoremId::Cor42, TheoremId::Cor44, TheoremId::Thm51,
                         TheoremId::Thm52a, TheoremId::Thm52b})
        if (s == to_string(id)) return id;
    return std::nullopt;
}

bool LimitCheck::monotone() const {
    for (Eigen::Index c = 0; c < deviations.cols(); ++c)
        for (Eigen::Index r = 1; r < deviations.rows(); ++r)
            if (deviations(r, c) > deviations(r - 1, c)) return false;
    return true;
}

double LimitCheck::max_deviation_at_last_n() const {
    if (deviations.rows() == 0) return 0.0;
    return deviations.row(deviations.rows() - 1).maxCoeff();
}

double estimate_k5(const LawParams& p, Eigen::Index n_max) {
    RegimeReport reg = classify_regime(p);
    require(reg.regime_id == Regime::R5, "K5 is the constant of the regime θ = ν, σ + δ/ν < 1");
    const RenewalTable r = build_renewal(p, n_max);
    return p.kappa0 * fit_tail(r.u, reg).constant;
}

LimitCheck convergence_sweep(const LawParams& p, TheoremId id, const std::vector<double>& s_grid,
                             const std::vector<Eigen::Index>& n_grid, std::optional<double> k5,
                             const RenewalTable* renewal) {
    for (std::size_t i = 1; i < s_grid.size(); ++i)
        if (!(s_grid[i] > s_grid[i - 1])) throw NumericError(ErrorCode::InvalidArgument, "s grid must increase");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (!(n_grid[i] > n_grid[i - 1])) throw NumericError(ErrorCode::InvalidArgument, "n grid must increase");
    LimitCheck lc;
    lc.theorem_id = id;
    lc.s_grid = s_grid;
    lc.n_grid = n_grid;
    const auto ns = static_cast<Eigen::Index>(s_grid.size());
    const auto nn = static_cast<Eigen::Index>(n_grid.size());
    lc.values.resize(nn, ns);
    lc.deviations.resize(nn, ns);
    lc.limits.assign(s_grid.size(), 0.0);

    const bool needs_renewal = id == TheoremId::Thm51 || id == TheoremId::Thm52a || id == TheoremId::Thm52b;
    RenewalTable own;
    if (needs_renewal) {
        const Eigen::Index top = n_grid.empty() ? 1 : n_grid.back();
        if (renewal == nullptr || renewal->n_max() < top) {
            own = build_renewal(p, top);
            renewal = &own;
        }
    }
    if (id == TheoremId::Thm52a)
        require(p.sigma() >= 1.0 - kRegimeTol, "the (1 + s^ν)^{-σ} limit needs σ >= 1");
    if (id == TheoremId::Thm52b) {
        require(p.sigma() < 1.0 - kRegimeTol, "the Λ(s, δ, ν) limit needs σ < 1");
        if (classify_regime(p).regime_id == Regime::R5 && !k5) k5 = estimate_k5(p);
        lc.k5 = k5;
    }

    for (Eigen::Index c = 0; c < ns; ++c) {
        const double s = s_grid[static_cast<std::size_t>(c)];
        switch (id) {
            case TheoremId::Thm41:
            case TheoremId::Thm43: lc.limits[c] = 0.0; break;
            case TheoremId::Cor42:
                require(theta_vs_nu(p) == 0, "the (1 + t^ν)^{-σ} limit needs θ = ν");
                lc.limits[c] = std::pow(1.0 + std::pow(s, p.nu), -p.sigma());
                break;
            case TheoremId::Cor44:
            case TheoremId::Thm51: lc.limits[c] = limit_thm51(p, s); break;
            case TheoremId::Thm52a:
            case TheoremId::Thm52b: lc.limits[c] = limit_thm52(p, s, k5); break;
        }
        if (id == TheoremId::Thm52b && k5 && classify_regime(p).regime_id == Regime::R5)
            lc.k5_sensitivity.push_back(limit_thm52_sensitivity(p, s, *k5));
        for (Eigen::Index r = 0; r < nn; ++r) {
            const Eigen::Index n = n_grid[static_cast<std::size_t>(r)];
            double v = 0.0;
            switch (id) {
                case TheoremId::Thm41: v = check_thm41(p, s, n); break;
                case TheoremId::Thm43: v = check_thm43(p, s, n); break;
                case TheoremId::Cor42: v = h_at(p, laplace_q0(s * qn_at_zero(p, n)), n); break;
                case TheoremId::Cor44:
                    v = h_at(p, laplace_q0(s * std::pow(static_cast<double>(n), -1.0 / p.theta)), n);
                    break;
                case TheoremId::Thm51:
                    v = conditional_laplace_exact(p, *renewal, n, s, Scaling::ByNInvTheta);
                    break;
                case TheoremId::Thm52a:
                case TheoremId::Thm52b: v = conditional_laplace_exact(p, *renewal, n, s, Scaling::ByQn); break;
            }
            lc.values(r, c) = v;
            lc.deviations(r, c) = std::abs(v - lc.limits[c]);
        }
    }
    return lc;
}

}  // namespace gwi
