// SPDX-License-Identifier: Apache-2.0
#include "gwi/cli.hpp"
#include "gwi/dp.hpp"
#include "gwi/errors.hpp"
#include "gwi/laws.hpp"
#include "gwi/limits.hpp"
#include "gwi/renewal.hpp"
#include "gwi/simulator.hpp"
#include "gwi/verify.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gwi {

namespace {

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Zero or empty fields mean "the command's default" until resolve() runs.
struct RunConfig {
    std::string command;
    LawParams params;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::uint64_t reps = 0;
    long horizon = 0;
    long nmax = 0;
    std::uint64_t cap = kDefaultCap;
    long dp_cap = -1;
    std::string model = "stopped";
    std::string law = "offspring";
    std::string theorem;
    std::string s_grid = "0.5,1,2";
    std::string n_grid;
    std::string out;
    std::string format;
};

// Shortest round-trip decimal, independent of the locale.
std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class I>
std::string fmt_int(I v) {
    return std::to_string(v);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Report {
    std::vector<std::pair<std::string, std::string>> items;
    void add(std::string k, std::string v) { items.emplace_back(std::move(k), std::move(v)); }
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

void write_row(std::ostream& os, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
    os << '\n';
}

void emit(std::ostream& os, const Table& t, const std::string& format) {
    if (format == "csv") {
        write_row(os, t.header);
        for (const auto& r : t.rows) write_row(os, r);
        return;
    }
    for (const auto& r : t.rows) {
        os << "row:";
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? ", " : " ") << t.header[i] << "=" << r[i];
        os << '\n';
    }
}

void emit(std::ostream& os, const Report& r, const std::string& format) {
    if (format == "csv") {
        write_row(os, {"key", "value"});
        for (const auto& [k, v] : r.items) write_row(os, {k, v});
        return;
    }
    for (const auto& [k, v] : r.items) os << k << ": " << v << '\n';
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) parts.push_back(item);
    return parts;
}

std::vector<double> parse_doubles(const std::string& s, const char* key) {
    std::vector<double> v;
    for (const auto& item : split_list(s)) {
        double x = 0;
        auto res = std::from_chars(item.data(), item.data() + item.size(), x);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw ConfigError(std::string("bad number '") + item + "' in " + key);
        v.push_back(x);
    }
    if (v.empty()) throw ConfigError(std::string(key) + " is empty");
    return v;
}

std::vector<Eigen::Index> parse_indices(const std::string& s, const char* key) {
    std::vector<Eigen::Index> v;
    for (double x : parse_doubles(s, key)) {
        if (!(x >= 1) || x != std::floor(x) || x > 1e9)
            throw ConfigError(std::string(key) + " entries must be integers in [1, 1e9]");
        v.push_back(static_cast<Eigen::Index>(x));
    }
    return v;
}

Model model_of(const RunConfig& c) {
    const auto m = parse_model(c.model);
    if (!m) throw ConfigError("unknown model '" + c.model + "' (z, stopped or gated)");
    return *m;
}

TheoremId theorem_of(const RunConfig& c) {
    const auto t = parse_theorem(c.theorem);
    if (!t) throw ConfigError("unknown theorem '" + c.theorem + "'");
    return *t;
}

bool is_section5(TheoremId id) {
    return id == TheoremId::Thm51 || id == TheoremId::Thm52a || id == TheoremId::Thm52b;
}

void resolve(RunConfig& c) {
    const std::string& cmd = c.command;
    if (c.reps == 0) c.reps = cmd == "verify" ? 20000 : 100000;
    if (c.horizon == 0) c.horizon = cmd == "verify" ? 20 : 50;
    if (c.nmax == 0) c.nmax = cmd == "regime" ? 100000 : 50;
    if (c.dp_cap < 0) c.dp_cap = cmd == "verify" ? 1024 : 4096;
    if (c.format.empty())
        c.format = (cmd == "validate" || cmd == "regime" || cmd == "verify") ? "report" : "csv";
    if (c.format != "csv" && c.format != "report") throw ConfigError("format must be csv or report");
    if (cmd == "limits") {
        if (c.theorem.empty()) {
            const LawParams& p = c.params;
            if (p.theta < p.nu) c.theorem = "thm51";
            else if (p.theta == p.nu) c.theorem = p.sigma() >= 1.0 ? "thm52a" : "thm52b";
            else throw ConfigError("no limit theorem applies for theta > nu; pass --theorem");
        }
        if (c.n_grid.empty()) c.n_grid = is_section5(theorem_of(c)) ? "100,1000,10000" : "1000,10000,100000";
    }
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
    if (c.dp_cap != 0 && (c.dp_cap < 64 || !std::has_single_bit(static_cast<unsigned long>(c.dp_cap))))
        throw ConfigError("dp-cap must be 0 or a power of two >= 64");
    model_of(c);
    if (c.law != "offspring" && c.law != "immigration" && c.law != "initial")
        throw ConfigError("unknown law '" + c.law + "' (offspring, immigration or initial)");
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

void write_manifest(std::ostream& os, const RunConfig& c) {
    os << "# gwi " << kVersion << " (Eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
       << EIGEN_MINOR_VERSION << ", CLI11 " << CLI11_VERSION << ")\n";
    os << "# command: " << c.command << "\n";
    if (!c.out.empty()) os << "# out: " << c.out << "\n";
    const LawParams& p = c.params;
    os << "nu=" << fmt(p.nu) << "\ntheta=" << fmt(p.theta) << "\ndelta=" << fmt(p.delta)
       << "\nkappa0=" << fmt(p.kappa0) << "\nkappa1=" << fmt(p.kappa1) << "\nkappa2=" << fmt(p.kappa2) << "\n";
    os << "seed=" << c.seed << "\nthreads=" << c.threads << "\nreps=" << c.reps << "\nhorizon=" << c.horizon
       << "\nnmax=" << c.nmax << "\ncap=" << c.cap << "\ndp-cap=" << c.dp_cap << "\n";
    os << "model=" << quoted(c.model) << "\nlaw=" << quoted(c.law) << "\nformat=" << quoted(c.format) << "\n";
    if (!c.theorem.empty()) os << "theorem=" << quoted(c.theorem) << "\n";
    os << "s-grid=" << quoted(c.s_grid) << "\n";
    if (!c.n_grid.empty()) os << "n-grid=" << quoted(c.n_grid) << "\n";
}

// ---- commands ---------------------------------------------------------------

Report cmd_validate(const RunConfig& c) {
    const LawParams& p = c.params;
    const RegimeReport r = classify_regime(p);
    Report rep;
    rep.add("status", "ok");
    rep.add("nu", fmt(p.nu));
    rep.add("theta", fmt(p.theta));
    rep.add("delta", fmt(p.delta));
    rep.add("kappa0", fmt(p.kappa0));
    rep.add("kappa1", fmt(p.kappa1));
    rep.add("kappa2", fmt(p.kappa2));
    rep.add("sigma", fmt(p.sigma()));
    rep.add("regime", to_string(r.regime_id));
    return rep;
}

Table cmd_pmf(const RunConfig& c) {
    PmfTable t;
    if (c.law == "offspring") t = offspring_pmf(c.params, c.nmax);
    else if (c.law == "immigration") t = immigration_pmf(c.params, c.nmax);
    else if (c.law == "initial") t = initial_pmf(c.params, c.nmax);
    else throw ConfigError("unknown law '" + c.law + "' (offspring, immigration or initial)");
    Table out{{"k", "p"}, {}};
    for (Eigen::Index k = 0; k < t.size(); ++k) out.rows.push_back({fmt_int(k), fmt(t[k])});
    return out;
}

Table cmd_simulate(const RunConfig& c) {
    Stream rng = Stream::derive(c.seed, 0);
    const Trajectory tr = simulate(c.params, model_of(c), c.horizon, c.cap, rng);
    Table out{{"n", "value", "state"}, {}};
    for (std::size_t n = 0; n < tr.values.size(); ++n)
        out.rows.push_back({fmt_int(n), fmt_int(tr.values[n]), tr.values[n] > 0 ? "alive" : "zero"});
    if (tr.cap_time >= 0) out.rows.push_back({fmt_int(tr.cap_time), "", "capped"});
    return out;
}

Table cmd_survival(const RunConfig& c) {
    const LawParams& p = c.params;
    const Model model = model_of(c);
    const RenewalTable ren = build_renewal(p, c.horizon);
    std::optional<DpDistribution> dp;
    if (c.dp_cap > 0) dp = DpOracle(p, c.dp_cap).run(model, c.horizon);
    BatchOptions bo;
    bo.reps = c.reps;
    bo.seed = c.seed;
    bo.threads = c.threads;
    bo.cap = c.cap;
    const BatchStats st = estimate_survival(p, model, c.horizon, bo);

    Table out{{"n", "u_renewal", "dp_lower", "dp_upper", "u_mc", "mc_se", "censored"}, {}};
    for (long n = 0; n <= c.horizon; ++n) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const auto b = dp ? dp->survival(n) : DpDistribution::Bracket{nan, nan};
        out.rows.push_back({fmt_int(n), fmt(ren.u[n]), fmt(b.lower), fmt(b.upper), fmt(st.survival(n)),
                            fmt(st.survival_se(n)), fmt_int(st.censored_by[n])});
    }
    return out;
}

Report cmd_regime(const RunConfig& c) {
    RegimeReport r = classify_regime(c.params);
    Report rep;
    rep.add("regime", to_string(r.regime_id));
    rep.add("alpha", fmt(r.alpha));
    rep.add("correction", to_string(r.correction));
    rep.add("sigma", fmt(r.sigma));
    if (r.regime_id != Regime::Uncovered && c.nmax >= 1000) {
        const RenewalTable ren = build_renewal(c.params, c.nmax);
        const TailFit fit = fit_tail_into(ren.u, r);
        rep.add("n_max", fmt_int(c.nmax));
        rep.add("fitted_alpha", fmt(r.fitted_alpha));
        rep.add("fit_verdict", to_string(fit.verdict));
        rep.add("u_last", fmt(ren.u[c.nmax]));
    }
    for (const auto& [k, v] : r.constants) rep.add("constant." + k, fmt(v));
    return rep;
}

void cmd_limits(const RunConfig& c, std::ostream& os) {
    const TheoremId id = theorem_of(c);
    const LimitCheck lc = convergence_sweep(c.params, id, parse_doubles(c.s_grid, "s-grid"),
                                            parse_indices(c.n_grid, "n-grid"));
    Table t{{"theorem", "n", "s", "value", "limit", "deviation"}, {}};
    for (std::size_t i = 0; i < lc.n_grid.size(); ++i)
        for (std::size_t j = 0; j < lc.s_grid.size(); ++j) {
            const auto r = static_cast<Eigen::Index>(i), col = static_cast<Eigen::Index>(j);
            t.rows.push_back({to_string(id), fmt_int(lc.n_grid[i]), fmt(lc.s_grid[j]), fmt(lc.values(r, col)),
                              fmt(lc.limits[j]), fmt(lc.deviations(r, col))});
        }
    if (c.format == "csv") {
        emit(os, t, "csv");
        return;
    }
    Report rep;
    rep.add("theorem", to_string(id));
    rep.add("monotone", lc.monotone() ? "yes" : "no");
    rep.add("max_deviation_at_last_n", fmt(lc.max_deviation_at_last_n()));
    if (lc.k5) rep.add("k5", fmt(*lc.k5));
    for (std::size_t j = 0; j < lc.k5_sensitivity.size(); ++j) {
        const auto& k = lc.k5_sensitivity[j];
        rep.add("k5_sensitivity.s=" + fmt(lc.s_grid[j]),
                fmt(k.value) + " [" + fmt(k.k5_minus) + ", " + fmt(k.k5_plus) + "]");
    }
    emit(os, rep, "report");
    emit(os, t, "report");
}

int cmd_verify(const RunConfig& c, std::ostream& os) {
    VerifyOptions vo;
    vo.seed = c.seed;
    vo.threads = c.threads;
    vo.reps = c.reps;
    vo.horizon = c.horizon;
    vo.dp_cap = c.dp_cap;
    const auto checks = run_invariant_suite(vo);
    std::size_t passed = 0;
    Table t{{"check", "status", "detail"}, {}};
    Report rep;
    for (const auto& ch : checks) {
        passed += ch.pass;
        t.rows.push_back({ch.name, ch.pass ? "PASS" : "FAIL", ch.detail});
        rep.add(ch.name, std::string(ch.pass ? "PASS " : "FAIL ") + ch.detail);
    }
    const bool ok = passed == checks.size();
    rep.add("result", std::string(ok ? "PASS " : "FAIL ") + fmt_int(passed) + "/" + fmt_int(checks.size()));
    if (c.format == "csv") emit(os, t, "csv");
    else emit(os, rep, "report");
    return ok ? 0 : 1;
}

int dispatch(const RunConfig& c, std::ostream& os) {
    const std::string& cmd = c.command;
    if (cmd == "validate") emit(os, cmd_validate(c), c.format);
    else if (cmd == "pmf") emit(os, cmd_pmf(c), c.format);
    else if (cmd == "simulate") emit(os, cmd_simulate(c), c.format);
    else if (cmd == "survival") emit(os, cmd_survival(c), c.format);
    else if (cmd == "regime") emit(os, cmd_regime(c), c.format);
    else if (cmd == "limits") cmd_limits(c, os);
    else if (cmd == "verify") return cmd_verify(c, os);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Critical branching process with immigration stopped at zero", "gwi"};
    app.set_config("--config", "", "key=value file; '#' starts a comment; flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.add_option("command", c.command, "validate | pmf | simulate | survival | regime | limits | verify")
        ->required()
        ->configurable(false)
        ->check(CLI::IsMember({"validate", "pmf", "simulate", "survival", "regime", "limits", "verify"}));
    app.add_option("--nu", c.params.nu);
    app.add_option("--theta", c.params.theta);
    app.add_option("--delta", c.params.delta);
    app.add_option("--kappa0", c.params.kappa0);
    app.add_option("--kappa1", c.params.kappa1);
    app.add_option("--kappa2", c.params.kappa2);
    app.add_option("--seed", c.seed);
    app.add_option("--threads", c.threads)->envname("GWI_THREADS");
    app.add_option("--reps", c.reps, "Monte Carlo replicates (0: command default)");
    app.add_option("--horizon", c.horizon, "generations (0: command default)")->check(CLI::NonNegativeNumber);
    app.add_option("--nmax", c.nmax, "table length (0: command default)")->check(CLI::NonNegativeNumber);
    app.add_option("--cap", c.cap, "population cap for simulation");
    app.add_option("--dp-cap", c.dp_cap, "DP truncation M, a power of two; 0 skips the DP columns");
    app.add_option("--model", c.model, "z | stopped | gated");
    app.add_option("--law", c.law, "offspring | immigration | initial");
    app.add_option("--theorem", c.theorem, "thm41 thm43 cor42 cor44 thm51 thm52a thm52b");
    app.add_option("--s-grid", c.s_grid, "comma-separated scales");
    app.add_option("--n-grid", c.n_grid, "comma-separated generations");
    app.add_option("--out", c.out, "output file; the manifest goes to <out>.manifest")->configurable(false);
    app.add_option("--format", c.format, "csv | report");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        c.params = validate_params(c.params);
        resolve(c);
        std::ostringstream body;
        const int status = dispatch(c, body);
        if (c.out.empty()) {
            out << body.str();
            write_manifest(err, c);
        } else {
            std::ofstream f(c.out, std::ios::binary);
            std::ofstream m(c.out + ".manifest", std::ios::binary);
            if (!f || !m) throw ConfigError("cannot write " + c.out);
            f << body.str();
            write_manifest(m, c);
        }
        return status;
    } catch (const ParamError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace gwi
