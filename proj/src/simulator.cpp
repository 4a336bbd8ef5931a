// SPDX-License-Identifier: Apache-2.0
#include "gwi/simulator.hpp"
#include "gwi/errors.hpp"
#include "gwi/numerics.hpp"
#include "gwi/pgf.hpp"

#include <cmath>

namespace gwi {

namespace {

constexpr std::uint64_t kChunk = 2048;

// One generation of the chosen variant from the current value x.
std::uint64_t step(const LawSamplers& laws, Model model, std::uint64_t x, Stream& rng) {
    const std::uint64_t lambda = laws.offspring.sum(x, rng);
    if (model == Model::GatedW && lambda == 0) return 0;
    return saturating_add(lambda, laws.immigration(rng));
}

bool absorbing(Model m) { return m != Model::UnstoppedZ; }

// Visits X_0..X_horizon of one replicate. visit(n, x) is called for each
// generation below the cap; on a cap event, on_cap(n) is called once and
// the walk ends. Absorbed chains stop early after reporting their zero.
template <class Visit, class OnCap>
void walk(const LawSamplers& laws, Model model, Eigen::Index horizon, std::uint64_t cap, Stream& rng,
          Visit&& visit, OnCap&& on_cap) {
    std::uint64_t x = laws.initial(rng);
    for (Eigen::Index n = 0;; ++n) {
        if (x > cap) {
            on_cap(n);
            return;
        }
        visit(n, x);
        if (n == horizon || (x == 0 && absorbing(model))) return;
        x = step(laws, model, x, rng);
    }
}

struct ChunkCounts {
    std::vector<std::uint64_t> positive, censored_at, first_zero;
    explicit ChunkCounts(Eigen::Index horizon)
        : positive(horizon + 1, 0), censored_at(horizon + 1, 0), first_zero(horizon + 1, 0) {}
};

// Runs `reps` replicates in fixed chunks; chunk c covers replicates
// [c·kChunk, (c+1)·kChunk) and body(c, first, last) fills slot c.
template <class Body>
void for_replicate_chunks(std::uint64_t reps, unsigned threads, Body&& body) {
    const std::size_t n_chunks = static_cast<std::size_t>((reps + kChunk - 1) / kChunk);
    parallel_for_chunks(n_chunks, threads, [&](std::size_t c) {
        const std::uint64_t first = c * kChunk;
        const std::uint64_t last = std::min(reps, first + kChunk);
        body(c, first, last);
    });
}

double binomial_se(std::uint64_t k, std::uint64_t n) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(k) / static_cast<double>(n);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

const char* to_string(Model m) noexcept {
    switch (m) {
        case Model::UnstoppedZ: return "UNSTOPPED_Z";
        case Model::StoppedZ: return "STOPPED_Z";
        case Model::GatedW: return "GATED_W";
    }
    return "?";
}

std::optional<Model> parse_model(const std::string& s) {
    if (s == "z" || s == "UNSTOPPED_Z" || s == "unstopped") return Model::UnstoppedZ;
    if (s == "stopped" || s == "STOPPED_Z") return Model::StoppedZ;
    if (s == "gated" || s == "GATED_W") return Model::GatedW;
    return std::nullopt;
}

Trajectory simulate(const LawSamplers& laws, Model model, Eigen::Index horizon, std::uint64_t cap,
                    Stream& rng) {
    Trajectory tr;
    tr.model = model;
    tr.values.reserve(static_cast<std::size_t>(horizon) + 1);
    walk(
        laws, model, horizon, cap, rng,
        [&](Eigen::Index n, std::uint64_t x) {
            tr.values.push_back(x);
            if (x == 0 && tr.life < 0) {
                tr.life = n;
                tr.status = LifeStatus::Died;
            }
        },
        [&](Eigen::Index n) {
            tr.cap_time = n;
            if (tr.life < 0) tr.status = LifeStatus::CensoredCap;
        });
    // Absorbed variants stay at zero through the horizon.
    if (absorbing(model) && tr.life >= 0) tr.values.resize(static_cast<std::size_t>(horizon) + 1, 0);
    return tr;
}

double BatchStats::survival(Eigen::Index n) const {
    return static_cast<double>(survival_count(n)) / static_cast<double>(reps);
}
double BatchStats::survival_se(Eigen::Index n) const { return binomial_se(survival_count(n), reps); }
double BatchStats::life_tail(Eigen::Index n) const {
    return static_cast<double>(life_exceeds[n]) / static_cast<double>(reps);
}
double BatchStats::life_tail_se(Eigen::Index n) const { return binomial_se(life_exceeds[n], reps); }

BatchStats estimate_survival(const LawParams& params, Model model, Eigen::Index horizon,
                             const BatchOptions& opt) {
    const LawSamplers laws(params);
    const std::size_t n_chunks = static_cast<std::size_t>((opt.reps + kChunk - 1) / kChunk);
    std::vector<ChunkCounts> parts(n_chunks, ChunkCounts(horizon));
    for_replicate_chunks(opt.reps, opt.threads, [&](std::size_t c, std::uint64_t first, std::uint64_t last) {
        ChunkCounts& cc = parts[c];
        for (std::uint64_t r = first; r < last; ++r) {
            Stream rng = Stream::derive(opt.seed, r);
            Eigen::Index zero_at = -1;
            walk(
                laws, model, horizon, opt.cap, rng,
                [&](Eigen::Index n, std::uint64_t x) {
                    if (x > 0) ++cc.positive[n];
                    else if (zero_at < 0) zero_at = n;
                },
                [&](Eigen::Index n) { ++cc.censored_at[n]; });
            if (zero_at >= 0) ++cc.first_zero[zero_at];
        }
    });

    BatchStats st;
    st.model = model;
    st.seed = opt.seed;
    st.reps = opt.reps;
    st.horizon = horizon;
    st.cap = opt.cap;
    st.positive.assign(horizon + 1, 0);
    st.censored_by.assign(horizon + 1, 0);
    st.life_exceeds.assign(horizon + 1, 0);
    std::vector<std::uint64_t> censored_at(horizon + 1, 0), first_zero(horizon + 1, 0);
    for (const auto& cc : parts)
        for (Eigen::Index n = 0; n <= horizon; ++n) {
            st.positive[n] += cc.positive[n];
            censored_at[n] += cc.censored_at[n];
            first_zero[n] += cc.first_zero[n];
        }
    std::uint64_t cens = 0, zeros = 0;
    for (Eigen::Index n = 0; n <= horizon; ++n) {
        cens += censored_at[n];
        zeros += first_zero[n];
        st.censored_by[n] = cens;
        st.life_exceeds[n] = opt.reps - zeros;
    }
    st.censored = cens;
    return st;
}

double censoring_bias_bound(const LawParams& params, Eigen::Index horizon, std::uint64_t cap) {
    if (horizon < 1) return 0.0;
    const double qn = q_iterate<double>(params, 0.0, horizon).q[horizon];
    const double log_bound = std::log(static_cast<double>(horizon)) + (static_cast<double>(cap) + 1.0) * std::log1p(-qn);
    return std::min(1.0, std::exp(log_bound));
}

std::vector<McEstimate> conditional_laplace_mc(const LawParams& params, Model model, Eigen::Index n,
                                               const std::vector<double>& scales, const BatchOptions& opt) {
    if (n < 1) throw NumericError(ErrorCode::InvalidArgument, "conditional transform needs n >= 1");
    const LawSamplers laws(params);
    const std::size_t ns = scales.size();
    const std::size_t n_chunks = static_cast<std::size_t>((opt.reps + kChunk - 1) / kChunk);
    struct Part {
        std::uint64_t positive = 0, censored = 0;
        std::vector<double> sum, sum_sq;
    };
    std::vector<Part> parts(n_chunks);
    for_replicate_chunks(opt.reps, opt.threads, [&](std::size_t c, std::uint64_t first, std::uint64_t last) {
        Part& p = parts[c];
        p.sum.assign(ns, 0.0);
        p.sum_sq.assign(ns, 0.0);
        std::vector<CompensatedSum<>> s(ns), s2(ns);
        for (std::uint64_t r = first; r < last; ++r) {
            Stream rng = Stream::derive(opt.seed, r);
            walk(
                laws, model, n, opt.cap, rng,
                [&](Eigen::Index m, std::uint64_t x) {
                    if (m != n || x == 0) return;
                    ++p.positive;
                    for (std::size_t i = 0; i < ns; ++i) {
                        const double v = std::exp(-scales[i] * static_cast<double>(x));
                        s[i].add(v);
                        s2[i].add(v * v);
                    }
                },
                [&](Eigen::Index) {
                    ++p.positive;
                    ++p.censored;
                });
        }
        for (std::size_t i = 0; i < ns; ++i) {
            p.sum[i] = s[i].value();
            p.sum_sq[i] = s2[i].value();
        }
    });

    std::uint64_t positive = 0, censored = 0;
    std::vector<CompensatedSum<>> s(ns), s2(ns);
    for (const auto& p : parts) {
        positive += p.positive;
        censored += p.censored;
        for (std::size_t i = 0; i < ns; ++i) {
            s[i].add(p.sum[i]);
            s2[i].add(p.sum_sq[i]);
        }
    }
    if (positive == 0)
        throw NumericError(ErrorCode::DegenerateConditioning, "no replicate is positive at generation " +
                                                                  std::to_string(n));
    std::vector<McEstimate> out(ns);
    const double m = static_cast<double>(positive);
    for (std::size_t i = 0; i < ns; ++i) {
        const double mean = s[i].value() / m;
        const double var = std::max(0.0, s2[i].value() / m - mean * mean);
        out[i].value = scales[i] == 0.0 ? 1.0 : mean;
        out[i].se = scales[i] == 0.0 ? 0.0 : (positive > 1 ? std::sqrt(var / (m - 1.0)) : 0.0);
        out[i].conditioning_count = positive;
        out[i].censored = censored;
    }
    return out;
}

McEstimate conditional_laplace_mc(const LawParams& params, Model model, Eigen::Index n, double scale,
                                  const BatchOptions& opt) {
    return conditional_laplace_mc(params, model, n, std::vector<double>{scale}, opt).front();
}

LifeTable sample_life_period(const LawParams& params, Model model, std::uint64_t reps, Eigen::Index horizon,
                             std::uint64_t seed, unsigned threads) {
    BatchOptions opt;
    opt.reps = reps;
    opt.seed = seed;
    opt.threads = threads;
    const BatchStats st = estimate_survival(params, model, horizon, opt);
    LifeTable t;
    t.reps = reps;
    for (Eigen::Index n = 0; n <= horizon; ++n) {
        t.tail.push_back(st.life_tail(n));
        t.se.push_back(st.life_tail_se(n));
        t.censored.push_back(st.censored_by[n]);
    }
    return t;
}

}  // namespace gwi
