// SPDX-License-Identifier: Apache-2.0
#include "gwi/renewal.hpp"
#include "gwi/errors.hpp"
#include "gwi/numerics.hpp"
#include "gwi/pgf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace gwi {

namespace {

constexpr Eigen::Index kFftThreshold = 10000;
constexpr Eigen::Index kDirectBlock = 128;

// u_n = f_n + Σ_{j<n} a_{n-1-j} u_j solved online: the left half of each
// block is finished first, then its contribution to the right half is
// added with one FFT convolution.
class OnlineSolver {
public:
    OnlineSolver(const Eigen::ArrayXd& a, Eigen::ArrayXd& acc) : a_(a), c_(acc), u_(acc.size()) {}

    Eigen::ArrayXd solve() {
        run(0, c_.size());
        return u_;
    }

private:
    void run(Eigen::Index l, Eigen::Index r) {
        if (r - l <= kDirectBlock) {
            for (Eigen::Index n = l; n < r; ++n) {
                u_[n] = c_[n];
                for (Eigen::Index m = n + 1; m < r; ++m) c_[m] += a_[m - 1 - n] * u_[n];
            }
            return;
        }
        const Eigen::Index mid = l + (r - l) / 2;
        run(l, mid);
        const Eigen::VectorXd left = u_.segment(l, mid - l).matrix();
        const Eigen::VectorXd kernel = a_.head(r - l - 1).matrix();
        const Eigen::VectorXd conv = fft_.convolve(left, kernel, r - 1 - l, false);
        for (Eigen::Index m = mid; m < r; ++m) c_[m] += conv[m - 1 - l];
        run(mid, r);
    }

    const Eigen::ArrayXd& a_;
    Eigen::ArrayXd& c_;
    Eigen::ArrayXd u_;
    FftConvolver fft_;
};

}  // namespace

RenewalTable build_renewal(const LawParams& p, Eigen::Index n_max, RenewalMethod method) {
    if (n_max < 0) throw NumericError(ErrorCode::InvalidArgument, "n_max must be >= 0");
    const auto tr = q_iterate<double>(p, 0.0, n_max);
    const auto g = gamma_from_q<double>(p, tr);
    RenewalTable t;
    t.kappa0 = p.kappa0;
    t.q = tr.q;
    t.gamma0 = g.log_gamma0.exp();
    t.a.resize(n_max + 1);
    t.d.resize(n_max + 1);
    for (Eigen::Index k = 0; k <= n_max; ++k) {
        const double qk = tr.q[k];
        t.a[k] = t.gamma0[k] * -std::expm1(-p.kappa2 * std::pow(qk, p.theta));
        t.d[k] = p.kappa0 * t.gamma0[k] * std::pow(qk, p.delta);
    }

    Eigen::ArrayXd f = t.d / p.kappa0;
    if (method == RenewalMethod::Auto) method = n_max > kFftThreshold ? RenewalMethod::Fft : RenewalMethod::Direct;
    if (method == RenewalMethod::Fft) {
        t.u = OnlineSolver(t.a, f).solve();
    } else {
        t.u.resize(n_max + 1);
        for (Eigen::Index n = 0; n <= n_max; ++n) {
            CompensatedSum<> s;
            s.add(f[n]);
            for (Eigen::Index k = 0; k < n; ++k) s.add(t.a[k] * t.u[n - 1 - k]);
            t.u[n] = s.value();
        }
    }
    return t;
}

const char* to_string(Regime r) noexcept {
    switch (r) {
        case Regime::R0: return "R0";
        case Regime::R1: return "R1";
        case Regime::R2: return "R2";
        case Regime::R3: return "R3";
        case Regime::R4: return "R4";
        case Regime::R5: return "R5";
        case Regime::R6: return "R6";
        case Regime::Uncovered: return "UNCOVERED";
    }
    return "?";
}

const char* to_string(Correction c) noexcept {
    switch (c) {
        case Correction::None: return "none";
        case Correction::Log: return "log";
        case Correction::InverseLog: return "inverse-log";
    }
    return "?";
}

RegimeReport classify_regime(const LawParams& p, double tol) {
    // -1, 0, +1 for x < y, x ≈ y, x > y
    auto cmp = [tol](double x, double y) {
        if (std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)})) return 0;
        return x < y ? -1 : 1;
    };
    RegimeReport r;
    r.sigma = p.sigma();
    const double dn = p.delta / p.nu;
    const int th = cmp(p.theta, p.nu);
    if (th < 0) {
        r.regime_id = Regime::R0;
        r.alpha = 0;
    } else if (th > 0) {
        if (cmp(p.delta, p.nu) < 0) {
            r.regime_id = Regime::R6;
            r.alpha = dn;
        } else {
            r.regime_id = Regime::Uncovered;
        }
    } else {
        const int s1 = cmp(r.sigma, 1.0);
        if (s1 > 0) {
            r.regime_id = Regime::R1;
            r.alpha = 0;
        } else if (s1 == 0) {
            r.regime_id = Regime::R2;
            r.alpha = 0;
            r.correction = Correction::InverseLog;
        } else {
            const int s2 = cmp(r.sigma + dn, 1.0);
            if (s2 > 0) {
                r.regime_id = Regime::R3;
                r.alpha = 1.0 - r.sigma;
            } else if (s2 == 0) {
                r.regime_id = Regime::R4;
                r.alpha = 1.0 - r.sigma;
                r.correction = Correction::Log;
            } else {
                r.regime_id = Regime::R5;
                r.alpha = dn;
            }
        }
    }
    return r;
}

namespace {

double correction_power(Correction c) {
    switch (c) {
        case Correction::Log: return 1.0;
        case Correction::InverseLog: return -1.0;
        default: return 0.0;
    }
}

}  // namespace

TailFit fit_tail(const Eigen::Ref<const Eigen::ArrayXd>& u, const RegimeReport& regime) {
    if (u.size() < 1000)
        throw NumericError(ErrorCode::InsufficientLength,
                           "tail fit needs at least 1000 terms, got " + std::to_string(u.size()));
    const Eigen::Index n_top = u.size() - 1;
    const Eigen::Index n_low = std::max<Eigen::Index>(3, n_top / 10);
    std::vector<Eigen::Index> idx;
    constexpr int kPoints = 400;
    for (int i = 0; i <= kPoints; ++i) {
        const double x = std::log(static_cast<double>(n_low)) +
                         (std::log(static_cast<double>(n_top)) - std::log(static_cast<double>(n_low))) * i / kPoints;
        const auto n = std::clamp<Eigen::Index>(std::llround(std::exp(x)), n_low, n_top);
        if (idx.empty() || n != idx.back()) idx.push_back(n);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd lx(m), lu(m), llx(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double n = static_cast<double>(idx[static_cast<std::size_t>(i)]);
        const double v = u[idx[static_cast<std::size_t>(i)]];
        if (!(v > 0.0))
            throw NumericError(ErrorCode::InvalidArgument, "tail fit needs a positive sequence");
        lx[i] = std::log(n);
        llx[i] = std::log(std::log(n));
        lu[i] = std::log(v);
    }
    TailFit out;
    const LinearFit f0 = linear_fit(lx, lu);
    const LinearFit f1 = linear_fit(lx, lu - llx);
    const LinearFit fm = linear_fit(lx, lu + llx);
    out.alpha_none = -f0.slope;
    out.alpha_log = -f1.slope;
    out.alpha_inverse_log = -fm.slope;
    out.rss_none = f0.rss;
    out.rss_log = f1.rss;
    out.rss_inverse_log = fm.rss;
    out.verdict = Correction::None;
    double best = f0.rss;
    if (f1.rss < best) {
        best = f1.rss;
        out.verdict = Correction::Log;
    }
    if (fm.rss < best) out.verdict = Correction::InverseLog;

    const double c = correction_power(regime.correction);
    out.fitted_alpha = c > 0 ? out.alpha_log : (c < 0 ? out.alpha_inverse_log : out.alpha_none);
    const double alpha = std::isnan(regime.alpha) ? out.fitted_alpha : regime.alpha;
    auto normalized = [&](Eigen::Index n) {
        const double x = static_cast<double>(n);
        return u[n] * std::pow(x, alpha) / std::pow(std::log(x), c);
    };
    out.constant = normalized(n_top);
    out.drift = std::abs(out.constant - normalized(n_low)) / std::abs(out.constant);
    return out;
}

TailFit fit_tail_into(const Eigen::Ref<const Eigen::ArrayXd>& u, RegimeReport& regime) {
    const TailFit f = fit_tail(u, regime);
    regime.fitted_alpha = f.fitted_alpha;
    regime.constants["K"] = f.constant;
    regime.constants["drift"] = f.drift;
    return f;
}

GammaAsymptotics gamma_asymptotics(const LawParams& p, Eigen::Index n_max) {
    if (n_max < 20) throw NumericError(ErrorCode::InsufficientLength, "gamma asymptotics needs n_max >= 20");
    using L = long double;
    const auto tr = q_iterate<L>(p, L(0), n_max);
    const auto g = gamma_from_q<L>(p, tr);
    GammaAsymptotics r;
    r.n_max = n_max;
    r.gamma_n = static_cast<double>(std::exp(g.log_gamma0[n_max]));
    const RegimeReport reg = classify_regime(p);
    const double ratio = p.theta / p.nu;
    if (reg.regime_id == Regime::R6 || reg.regime_id == Regime::Uncovered) {
        r.kind = GammaCase::Convergent;
        // Σ_{j≥N} q_j^θ with q_j^{-ν} ≈ q_N^{-ν} + κ1ν(j - N), as a midpoint integral.
        const double a = static_cast<double>(std::pow(tr.q[n_max], -static_cast<L>(p.nu)));
        const double c = p.kappa1 * p.nu;
        const double tail = std::pow(a - 0.5 * c, 1.0 - ratio) / (c * (ratio - 1.0));
        r.c0 = static_cast<double>(std::exp(g.log_gamma0[n_max] - static_cast<L>(p.kappa2 * tail)));
        r.cauchy = std::abs(r.gamma_n - static_cast<double>(std::exp(g.log_gamma0[n_max / 2])));
    } else if (reg.regime_id == Regime::R0) {
        r.kind = GammaCase::Stretched;
        const double e = 1.0 - ratio;
        r.c2 = std::pow(p.kappa1, -ratio) * p.kappa2 * std::pow(p.nu, e) / (p.nu - p.theta);
        const Eigen::Index lo = n_max / 10;
        const Eigen::Index m = std::min<Eigen::Index>(2000, n_max - lo + 1);
        Eigen::VectorXd x(m), y(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const Eigen::Index n = lo + (n_max - lo) * i / std::max<Eigen::Index>(1, m - 1);
            x[i] = std::pow(static_cast<double>(n), e);
            y[i] = -static_cast<double>(g.log_gamma0[n]);
        }
        r.slope = linear_fit(x, y).slope;
        r.c2_rel_error = std::abs(r.slope - r.c2) / r.c2;
    } else {
        r.kind = GammaCase::PowerLaw;
        const double s = p.sigma();
        auto scaled = [&](Eigen::Index n) {
            return static_cast<double>(std::exp(g.log_gamma0[n] + static_cast<L>(s) * std::log(static_cast<L>(n))));
        };
        r.c1 = scaled(n_max);
        r.c1_drift = std::abs(r.c1 - scaled(n_max / 10)) / r.c1;
    }
    return r;
}

std::vector<NamedParams> standard_regime_grid() {
    auto mk = [](double nu, double theta, double delta, double k1, double k2) {
        return LawParams{nu, theta, delta, 1.0, k1, k2};
    };
    return {
        {"R0", mk(1.0, 0.5, 1.0, 0.5, 1.0)},
        {"R1", mk(1.0, 1.0, 1.0, 0.5, 1.0)},
        {"R2", mk(1.0, 1.0, 1.0, 0.5, 0.5)},
        {"R3", mk(1.0, 1.0, 1.0, 0.5, 0.25)},
        {"R4", mk(1.0, 1.0, 0.5, 0.5, 0.25)},
        {"R5", mk(1.0, 1.0, 0.25, 0.5, 0.25)},
        {"R6", mk(0.5, 1.0, 0.25, 0.5, 1.0)},
    };
}

}  // namespace gwi
