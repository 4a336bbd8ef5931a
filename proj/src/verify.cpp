// SPDX-License-Identifier: Apache-2.0
#include "gwi/verify.hpp"
#include "gwi/dp.hpp"
#include "gwi/errors.hpp"
#include "gwi/limits.hpp"
#include "gwi/numerics.hpp"
#include "gwi/pgf.hpp"
#include "gwi/renewal.hpp"
#include "gwi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace gwi {

namespace {

// MC comparisons use a 4-SE band: each check is a maximum over many
// correlated generations, so 3 SE would flag a correct sampler too often.
constexpr double kZLimit = 4.0;
constexpr std::uint64_t kMcCap = 100000;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct Suite {
    std::vector<VerifyCheck> checks;

    void add(std::string name, bool pass, std::string detail) {
        checks.push_back({std::move(name), pass, std::move(detail)});
    }
    // Runs body and records a failure if it throws.
    void guarded(const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            add(name, false, std::string("error ") + e.what());
        }
    }
};

void check_grid_labels(Suite& s, const std::vector<NamedParams>& grid) {
    for (const auto& g : grid) {
        s.guarded("regime." + g.name, [&] {
            validate_params(g.params);
            const RegimeReport r = classify_regime(g.params);
            s.add("regime." + g.name, g.name == to_string(r.regime_id),
                  std::string("classified ") + to_string(r.regime_id));
        });
    }
}

void check_pmf_mass(Suite& s, const std::vector<NamedParams>& grid) {
    double worst = 0.0;
    for (const auto& g : grid) {
        const PmfTable off = offspring_pmf(g.params, 4096);
        const PmfTable ini = initial_pmf(g.params, 4096);
        worst = std::max(worst, std::abs(compensated_sum(off.probs) + off.truncation_mass - 1.0));
        worst = std::max(worst, std::abs(compensated_sum(ini.probs) + ini.truncation_mass - 1.0));
    }
    s.add("pmf.mass", worst <= 1e-12, "max |sum + tail - 1| = " + num(worst));
}

void check_renewal_identities(Suite& s, const std::vector<NamedParams>& grid) {
    double worst_u1 = 0.0, worst_fft = 0.0;
    for (const auto& g : grid) {
        const LawParams& p = g.params;
        const RenewalTable direct = build_renewal(p, 3000, RenewalMethod::Direct);
        const RenewalTable fft = build_renewal(p, 3000, RenewalMethod::Fft);
        const double u1 = 1.0 - std::exp(-p.kappa2) * (1.0 - std::pow(1.0 - p.kappa1, p.delta));
        worst_u1 = std::max(worst_u1, std::abs(direct.u[1] - u1));
        worst_fft = std::max(worst_fft, (direct.u - fft.u).abs().maxCoeff());
    }
    s.add("renewal.u1_closed_form", worst_u1 <= 1e-14, "max error " + num(worst_u1));
    s.add("renewal.direct_vs_fft", worst_fft <= 1e-12, "max difference " + num(worst_fft));
}

void check_dp(Suite& s, const std::vector<NamedParams>& grid, const VerifyOptions& opt) {
    for (const auto& g : grid) {
        const std::string name = "dp.bracket." + g.name;
        s.guarded(name, [&] {
            const LawParams& p = g.params;
            const DpOracle dp(p, opt.dp_cap);
            const RenewalTable ren = build_renewal(p, opt.horizon, RenewalMethod::Direct);
            const DpDistribution stopped = dp.run(Model::StoppedZ, opt.horizon);
            double outside = 0.0, width = 0.0;
            for (long n = 0; n <= opt.horizon; ++n) {
                const auto b = stopped.survival(n);
                outside = std::max({outside, b.lower - ren.u[n], ren.u[n] - b.upper});
                width = std::max(width, b.upper - b.lower);
            }
            s.add(name, outside <= 0.0, "max bracket width " + num(width));

            // E e^{-λZ_n} from the q-orbit against the unconditioned DP law.
            const DpDistribution free = dp.run(Model::UnstoppedZ, opt.horizon, false);
            const Eigen::VectorXd& pi = free.pi.back();
            double excess = 0.0;
            for (double lambda : {0.1, 1.0}) {
                double acc = 0.0;
                for (Eigen::Index k = pi.size() - 1; k >= 0; --k)
                    acc += pi[k] * std::exp(-lambda * static_cast<double>(k));
                const double err = std::abs(acc - laplace_zn(p, lambda, opt.horizon));
                excess = std::max(excess, err - free.lost_mass.back() - 1e-9);
            }
            s.add("dp.laplace." + g.name, excess <= 0.0, "excess over truncation bound " + num(std::max(0.0, excess)));
        });
    }
}

void check_mc(Suite& s, const std::vector<NamedParams>& grid, const VerifyOptions& opt) {
    BatchOptions bo;
    bo.reps = opt.reps;
    bo.seed = opt.seed;
    bo.threads = opt.threads;
    bo.cap = kMcCap;
    for (const auto& g : grid) {
        const std::string name = "mc.stopped." + g.name;
        s.guarded(name, [&] {
            const LawParams& p = g.params;
            const RenewalTable ren = build_renewal(p, opt.horizon, RenewalMethod::Direct);
            const BatchStats st = estimate_survival(p, Model::StoppedZ, opt.horizon, bo);
            const double bias = censoring_bias_bound(p, opt.horizon, kMcCap);
            double worst = 0.0;
            for (long n = 1; n <= opt.horizon; ++n) {
                const double se = std::max(st.survival_se(n), 1.0 / static_cast<double>(opt.reps));
                const double gap = std::max(0.0, std::abs(st.survival(n) - p.kappa0 * ren.u[n]) - bias);
                worst = std::max(worst, gap / se);
            }
            s.add(name, worst <= kZLimit, "max |z| " + num(worst));
        });
    }
}

void check_orbit(Suite& s) {
    for (double nu : {1.0, 0.5}) {
        LawParams p;
        p.nu = nu;
        p.kappa1 = 0.5;
        double gap = 0.0;
        for (double t : {0.0, 0.5, 0.9, 0.99, 0.999}) gap = std::max(gap, std::abs(theorem21_gap(p, t, 10000)));
        s.add("orbit.gap.nu=" + label(nu), gap < 1e-2, "max |gap| at n=1e4 " + num(gap));
    }
}

void check_limits(Suite& s) {
    s.guarded("limit.lambda_closed_form", [&] {
        // σ = 0.5 with δ/ν = 1 sits on the quadrature branch σ >= 1 - δ/ν.
        const LawParams p{1.0, 1.0, 1.0, 1.0, 0.5, 0.25};
        double worst = 0.0;
        for (int i = 1; i <= 20; ++i) {
            const double x = 0.25 * i;
            worst = std::max(worst, std::abs(limit_thm52(p, x) - 1.0 / (1.0 + x)));
        }
        s.add("limit.lambda_closed_form", worst <= 1e-8, "max error " + num(worst));
    });
    s.guarded("limit.stationary_c0", [&] {
        const LawParams p{0.5, 1.0, 0.25, 1.0, 0.5, 1.0};
        const StationaryValue st = stationary_pgf(p, 0.0);
        const GammaAsymptotics ga = gamma_asymptotics(p, 1000000);
        const double err = std::abs(st.value - ga.c0);
        s.add("limit.stationary_c0", err <= 1e-6, "difference " + num(err));
    });
}

void check_stable(Suite& s, const VerifyOptions& opt) {
    const std::uint64_t draws = opt.reps;
    for (double theta : {0.25, 0.5, 0.75}) {
        const std::string name = "sampler.stable_laplace.theta=" + label(theta);
        std::vector<CompensatedSum<>> sum(3), sum_sq(3);
        const double lambdas[3] = {0.5, 1.0, 2.0};
        // Stream index offset by 2^40 keeps these draws apart from replicate streams.
        for (std::uint64_t i = 0; i < draws; ++i) {
            Stream rng = Stream::derive(opt.seed, (std::uint64_t{1} << 40) + i);
            const double x = stable_positive(theta, rng);
            for (int j = 0; j < 3; ++j) {
                const double v = std::exp(-lambdas[j] * x);
                sum[j].add(v);
                sum_sq[j].add(v * v);
            }
        }
        double worst = 0.0;
        const double m = static_cast<double>(draws);
        for (int j = 0; j < 3; ++j) {
            const double mean = sum[j].value() / m;
            const double se = std::sqrt(std::max(0.0, sum_sq[j].value() / m - mean * mean) / (m - 1.0));
            worst = std::max(worst, std::abs(mean - std::exp(-std::pow(lambdas[j], theta))) / se);
        }
        s.add(name, worst <= kZLimit, "max |z| " + num(worst));
    }
}

}  // namespace

std::vector<VerifyCheck> run_invariant_suite(const VerifyOptions& opt) {
    if (opt.horizon < 1 || opt.reps < 2)
        throw NumericError(ErrorCode::InvalidArgument, "verify needs horizon >= 1 and reps >= 2");
    const auto grid = standard_regime_grid();
    Suite s;
    check_grid_labels(s, grid);
    check_pmf_mass(s, grid);
    check_renewal_identities(s, grid);
    check_dp(s, grid, opt);
    check_mc(s, grid, opt);
    check_orbit(s);
    check_limits(s);
    check_stable(s, opt);
    return s.checks;
}

}  // namespace gwi
