// Command-line front end: problem construction, solver execution, parameter
// sweeps, certificate checks, and CSV/JSON emission.
//
// Subcommands:
//   solve      one configured run -> report.json, residuals.csv [, trace.csv]
//   sweep      grid over theta x zeta x isync x repetition -> sweep.csv
//   certify    convergence-condition certificate -> certificate.json
//   imbalance  grouped-slowdown comparison (sync vs async) -> imbalance.csv
//
// Exit codes: 0 converged (or certificate written), 1 divergence / k_max /
// run error, 2 configuration error.  Configuration precedence is
// flags > config file > defaults; the file is key/value with optional
// [section] nesting, keys named after the long flags.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aschwarz/analysis.hpp"
#include "aschwarz/decomposition.hpp"
#include "aschwarz/delay.hpp"
#include "aschwarz/poisson.hpp"
#include "aschwarz/report.hpp"
#include "aschwarz/sim_engine.hpp"
#include "aschwarz/sync_solver.hpp"
#include "aschwarz/thread_engine.hpp"

namespace {

using namespace aschwarz;
namespace fs = std::filesystem;

// Shortest round-trip formatting, matching the report serializers, so equal
// values always produce equal bytes.
std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Raw (string-typed) options.  CLI11 fills these from flags; the config file
// fills whichever the command line left untouched; materialize() converts to
// typed values so both sources share one validation path.
// ---------------------------------------------------------------------------

struct RawOptions {
    std::string config_file;
    std::string grid = "8,8,8";
    std::string procs = "2,2,2";
    std::string overlap = "1";
    std::string weights = "multiplicity";
    std::string source = "4590";
    std::string scheme = "mult";
    std::string layout = "replicated";
    std::string theta = "1";
    std::string zeta = "inf";
    std::string eps = "1e-6";
    std::string kmax = "100000";
    std::string engine = "sync";  // per-subcommand default, set at registration
    std::string delays = "zero";
    std::string isync = "xtau";
    std::string local = "lu";
    std::string coarse = "lu";
    std::string out = ".";
    std::string seed;       // empty = keep the schedule's own seed
    std::string reps = "1";
    std::string slowdowns;  // empty = none
    std::string coarse_op = "selection";
    bool trace = false;
    // sweep lists
    std::string thetas = "1";
    std::string zetas = "inf";
    std::string isyncs;  // empty = just --isync
    // imbalance
    std::string max_slowdown = "1";
};

struct Registry {
    struct Entry {
        CLI::Option* opt = nullptr;
        std::function<void(const std::string&)> set;
    };
    std::map<std::string, Entry> entries;  // canonical key (hyphenated) -> entry
};

void add_str(CLI::App* sub, Registry& reg, const std::string& name, std::string& slot,
             const std::string& help) {
    CLI::Option* o = sub->add_option("--" + name, slot, help);
    reg.entries[name] = {o, [&slot](const std::string& v) { slot = v; }};
}

bool parse_bool_value(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument(key + ": expected a boolean, got \"" + v + "\"");
}

void register_common(CLI::App* sub, RawOptions& raw, Registry& reg) {
    sub->add_option("--config", raw.config_file,
                    "config file (key = value; [section] headers group keys; "
                    "flags override file values)");
    add_str(sub, reg, "grid", raw.grid, "interior grid NX,NY,NZ");
    add_str(sub, reg, "procs", raw.procs, "process grid PX,PY,PZ");
    add_str(sub, reg, "overlap", raw.overlap, "overlap in mesh steps");
    add_str(sub, reg, "weights", raw.weights, "partition-of-unity weights {multiplicity|restricted}");
    add_str(sub, reg, "source", raw.source, "uniform source value of the right-hand side");
    add_str(sub, reg, "scheme", raw.scheme, "{one|mult|add}");
    add_str(sub, reg, "layout", raw.layout, "coarse layout {replicated|centralized}");
    add_str(sub, reg, "theta", raw.theta, "coarse-correction damping (> 0)");
    add_str(sub, reg, "zeta", raw.zeta, "max identical corrections per install, N or inf");
    add_str(sub, reg, "eps", raw.eps, "stopping threshold");
    add_str(sub, reg, "kmax", raw.kmax, "iteration cap");
    add_str(sub, reg, "engine", raw.engine, "{sync|sim|threads}");
    add_str(sub, reg, "delays", raw.delays, "zero | fixed:D | rand:MAX:SEED | FILE (JSON schedule)");
    add_str(sub, reg, "isync", raw.isync, "asynchronous coarse gather {xtau|tau}");
    add_str(sub, reg, "local", raw.local, "local solver {lu|cg:TOL}");
    add_str(sub, reg, "coarse", raw.coarse, "coarse solver {lu|cg:TOL}");
    add_str(sub, reg, "out", raw.out, "output directory");
    add_str(sub, reg, "seed", raw.seed, "override the delay-schedule seed");
    add_str(sub, reg, "reps", raw.reps, "repetitions (sweep rows per combination)");
    add_str(sub, reg, "slowdowns", raw.slowdowns, "per-process slowdown factors a,b,...");
    add_str(sub, reg, "coarse-op", raw.coarse_op,
            "certified coarse operator {selection|aggregation}");
    add_str(sub, reg, "thetas", raw.thetas, "sweep list of theta values");
    add_str(sub, reg, "zetas", raw.zetas, "sweep list of zeta values (N or inf)");
    add_str(sub, reg, "isyncs", raw.isyncs, "sweep list of isync variants");
    add_str(sub, reg, "max-slowdown", raw.max_slowdown, "imbalance group count m (slowdowns 1..m)");
    CLI::Option* tr = sub->add_flag("--trace", raw.trace, "write trace.csv (sim engine only)");
    reg.entries["trace"] = {tr, [&raw](const std::string& v) {
                                raw.trace = parse_bool_value("trace", v);
                            }};
}

// ---------------------------------------------------------------------------
// Config file: '#'/';' comments, blank lines, optional [section] headers
// (organizational), and key = value pairs.  Keys are the long flag names;
// '_' is accepted for '-'.  Values set only options absent from the command
// line, giving flags > file > defaults.
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

void apply_config_file(const std::string& path, Registry& reg) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("--config: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const std::string where = path + ":" + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw std::invalid_argument(where + ": malformed section header \"" + t + "\"");
            continue;  // sections group keys for the reader; keys stay global
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(where + ": expected key = value, got \"" + t + "\"");
        std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        for (char& c : key)
            if (c == '_') c = '-';
        if (key.empty())
            throw std::invalid_argument(where + ": empty key");
        auto it = reg.entries.find(key);
        if (it == reg.entries.end())
            throw std::invalid_argument(where + ": unknown configuration key \"" + key + "\"");
        if (it->second.opt->count() == 0) it->second.set(value);
    }
}

// ---------------------------------------------------------------------------
// Typed materialization.  Every failure throws std::invalid_argument whose
// message names the offending flag.
// ---------------------------------------------------------------------------

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::uint64_t parse_u64(const std::string& name, const std::string& s) {
    try {
        std::size_t pos = 0;
        if (s.empty() || s[0] == '-') throw std::invalid_argument("negative");
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(name + ": expected a nonnegative integer, got \"" + s + "\"");
    }
}

double parse_dbl(const std::string& name, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(name + ": expected a number, got \"" + s + "\"");
    }
}

std::array<std::size_t, 3> parse_triple(const std::string& name, const std::string& s) {
    const auto parts = split_list(s, ',');
    if (parts.size() != 3)
        throw std::invalid_argument(name + ": expected three comma-separated values, got \"" + s +
                                    "\"");
    std::array<std::size_t, 3> out{};
    for (int i = 0; i < 3; ++i) {
        out[i] = parse_u64(name, parts[i]);
        if (out[i] == 0) throw std::invalid_argument(name + ": dimensions must be >= 1");
    }
    return out;
}

std::size_t parse_zeta(const std::string& name, const std::string& s) {
    if (s == "inf") return zeta_infinite;
    const std::uint64_t v = parse_u64(name, s);
    if (v == 0) throw std::invalid_argument(name + ": zeta must be >= 1 (or inf)");
    return static_cast<std::size_t>(v);
}

Scheme parse_scheme(const std::string& s) {
    if (s == "one") return Scheme::one_level;
    if (s == "mult") return Scheme::two_level_mult;
    if (s == "add") return Scheme::two_level_add;
    throw std::invalid_argument("--scheme: expected one|mult|add, got \"" + s + "\"");
}

CoarseLayout parse_layout(const std::string& s) {
    if (s == "replicated") return CoarseLayout::replicated;
    if (s == "centralized") return CoarseLayout::centralized;
    throw std::invalid_argument("--layout: expected replicated|centralized, got \"" + s + "\"");
}

WeightStrategy parse_weights(const std::string& s) {
    if (s == "multiplicity") return WeightStrategy::multiplicity;
    if (s == "restricted") return WeightStrategy::restricted;
    throw std::invalid_argument("--weights: expected multiplicity|restricted, got \"" + s + "\"");
}

IsyncVariant parse_isync(const std::string& name, const std::string& s) {
    if (s == "xtau") return IsyncVariant::xtau;
    if (s == "tau") return IsyncVariant::tau;
    throw std::invalid_argument(name + ": expected xtau|tau, got \"" + s + "\"");
}

InnerSolver parse_inner(const std::string& name, const std::string& s) {
    InnerSolver inner;
    if (s == "lu") return inner;
    if (s == "cg") {
        inner.kind = InnerSolver::Kind::cg;
        return inner;
    }
    if (s.rfind("cg:", 0) == 0) {
        inner.kind = InnerSolver::Kind::cg;
        inner.cg_tol = parse_dbl(name, s.substr(3));
        if (!(inner.cg_tol > 0.0)) throw std::invalid_argument(name + ": cg tolerance must be > 0");
        return inner;
    }
    throw std::invalid_argument(name + ": expected lu|cg:TOL, got \"" + s + "\"");
}

DelaySchedule parse_delays(const std::string& s) {
    DelaySchedule d;
    if (s == "zero") return d;
    if (s.rfind("fixed:", 0) == 0) {
        d.mode = DelayMode::fixed;
        d.fixed_delay = static_cast<int>(parse_u64("--delays", s.substr(6)));
        return d;
    }
    if (s.rfind("rand:", 0) == 0) {
        const auto parts = split_list(s.substr(5), ':');
        if (parts.size() != 2)
            throw std::invalid_argument("--delays: expected rand:MAX:SEED, got \"" + s + "\"");
        d.mode = DelayMode::seeded_random;
        d.max_delay = static_cast<int>(parse_u64("--delays", parts[0]));
        d.seed = parse_u64("--delays", parts[1]);
        return d;
    }
    try {
        return delay_schedule_from_file(s);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("--delays: ") + e.what());
    }
}

struct Experiment {
    PoissonSpec prob;
    std::array<std::size_t, 3> grid{}, procs{};
    std::size_t overlap = 0;
    WeightStrategy strategy = WeightStrategy::multiplicity;
    SolverConfig cfg;
    DelaySchedule delays;
    std::string engine;
    std::string coarse_op;
    fs::path out;
    std::size_t reps = 1;
    bool trace = false;
    std::vector<double> thetas;
    std::vector<std::size_t> zetas;
    std::vector<IsyncVariant> isyncs;
    std::size_t max_slowdown = 1;
};

Experiment materialize(const RawOptions& raw) {
    Experiment ex;
    ex.grid = parse_triple("--grid", raw.grid);
    ex.procs = parse_triple("--procs", raw.procs);
    ex.overlap = static_cast<std::size_t>(parse_u64("--overlap", raw.overlap));
    ex.strategy = parse_weights(raw.weights);
    ex.prob.cells = ex.grid;
    ex.prob.source_value = parse_dbl("--source", raw.source);

    ex.cfg.scheme = parse_scheme(raw.scheme);
    ex.cfg.coarse_layout = parse_layout(raw.layout);
    ex.cfg.theta = parse_dbl("--theta", raw.theta);
    if (!(ex.cfg.theta > 0.0)) throw std::invalid_argument("--theta: must be > 0");
    ex.cfg.zeta = parse_zeta("--zeta", raw.zeta);
    ex.cfg.epsilon = parse_dbl("--eps", raw.eps);
    if (!(ex.cfg.epsilon > 0.0)) throw std::invalid_argument("--eps: must be > 0");
    ex.cfg.k_max = static_cast<std::size_t>(parse_u64("--kmax", raw.kmax));
    if (ex.cfg.k_max < 1) throw std::invalid_argument("--kmax: must be >= 1");
    ex.cfg.isync = parse_isync("--isync", raw.isync);
    ex.cfg.local_solver = parse_inner("--local", raw.local);
    ex.cfg.coarse_solver = parse_inner("--coarse", raw.coarse);

    if (raw.engine != "sync" && raw.engine != "sim" && raw.engine != "threads")
        throw std::invalid_argument("--engine: expected sync|sim|threads, got \"" + raw.engine +
                                    "\"");
    ex.engine = raw.engine;

    ex.delays = parse_delays(raw.delays);
    if (!raw.seed.empty()) ex.delays.seed = parse_u64("--seed", raw.seed);
    if (!raw.slowdowns.empty()) {
        ex.delays.slowdowns.clear();
        for (const std::string& part : split_list(raw.slowdowns, ','))
            ex.delays.slowdowns.push_back(parse_dbl("--slowdowns", part));
    }

    if (raw.coarse_op != "selection" && raw.coarse_op != "aggregation")
        throw std::invalid_argument("--coarse-op: expected selection|aggregation, got \"" +
                                    raw.coarse_op + "\"");
    ex.coarse_op = raw.coarse_op;

    ex.out = fs::path(raw.out);
    ex.reps = static_cast<std::size_t>(parse_u64("--reps", raw.reps));
    if (ex.reps < 1) throw std::invalid_argument("--reps: must be >= 1");
    ex.trace = raw.trace;

    for (const std::string& part : split_list(raw.thetas, ',')) {
        const double th = parse_dbl("--thetas", part);
        if (!(th > 0.0)) throw std::invalid_argument("--thetas: values must be > 0");
        ex.thetas.push_back(th);
    }
    for (const std::string& part : split_list(raw.zetas, ','))
        ex.zetas.push_back(parse_zeta("--zetas", part));
    if (raw.isyncs.empty()) {
        ex.isyncs.push_back(ex.cfg.isync);
    } else {
        for (const std::string& part : split_list(raw.isyncs, ','))
            ex.isyncs.push_back(parse_isync("--isyncs", part));
    }

    ex.max_slowdown = static_cast<std::size_t>(parse_u64("--max-slowdown", raw.max_slowdown));
    if (ex.max_slowdown < 1) throw std::invalid_argument("--max-slowdown: must be >= 1");

    ex.cfg.validate();
    return ex;
}

// ---------------------------------------------------------------------------
// Problem assembly and engine dispatch.
// ---------------------------------------------------------------------------

struct Problem {
    SparseMatrix A;
    Vector b;
    Decomposition dec;
    std::optional<CoarseSpace> coarse;
};

Problem build_problem(const Experiment& ex) {
    auto [A, b] = assemble_poisson(ex.prob);
    Decomposition dec = partition_box(ex.grid, ex.procs, ex.overlap);
    if (ex.strategy != dec.strategy) dec = build_weights(dec, ex.strategy);
    ex.delays.validate(dec.p);
    Problem pr{std::move(A), std::move(b), std::move(dec), std::nullopt};
    if (ex.cfg.scheme != Scheme::one_level) pr.coarse = build_coarse(pr.dec, pr.A);
    return pr;
}

struct RunOutcome {
    RunReport report;
    std::vector<TraceRow> trace;
    std::vector<long long> fine_per_process;
    std::vector<long long> installs_per_process;
};

RunOutcome execute(const Problem& pr, const SolverConfig& cfg, const DelaySchedule& delays,
                   const std::string& engine, bool want_trace) {
    const CoarseSpace* coarse = pr.coarse ? &*pr.coarse : nullptr;
    RunOutcome out;
    if (engine == "sync") {
        SolveResult r = cfg.scheme == Scheme::one_level
                            ? solve_one_level(pr.A, pr.b, pr.dec, cfg)
                            : solve_two_level_sync(pr.A, pr.b, pr.dec, *coarse, cfg);
        out.report = std::move(r.report);
    } else if (engine == "sim") {
        SimOptions opts;
        opts.record_trace = want_trace;
        SimResult r = run_simulator(pr.A, pr.b, pr.dec, coarse, cfg, delays, opts);
        out.report = std::move(r.result.report);
        out.trace = std::move(r.trace);
        out.fine_per_process = std::move(r.fine_updates_per_process);
        out.installs_per_process = std::move(r.installs_per_process);
    } else {
        ThreadResult r = run_threads(pr.A, pr.b, pr.dec, coarse, cfg, delays);
        out.report = std::move(r.result.report);
        out.fine_per_process = std::move(r.fine_updates_per_process);
        out.installs_per_process = std::move(r.installs_per_process);
    }
    return out;
}

std::string trace_to_csv(const std::vector<TraceRow>& rows) {
    std::string out = "# trace csv v1\ntick,micro,process,event,detail\n";
    for (const TraceRow& r : rows) {
        out += std::to_string(r.tick);
        out += ',';
        out += std::to_string(r.micro);
        out += ',';
        out += std::to_string(r.process);
        out += ',';
        out += trace_event_name(r.event);
        out += ',';
        out += std::to_string(r.detail);
        out += '\n';
    }
    return out;
}

void write_output(const fs::path& dir, const std::string& name, const std::string& content) {
    fs::create_directories(dir);
    const fs::path p = dir / name;
    write_text_file(p.string(), content);
    std::cout << "wrote " << p.string() << "\n";
}

std::string zeta_str(std::size_t z) {
    return z == zeta_infinite ? std::string("inf") : std::to_string(z);
}

const char* isync_str(IsyncVariant v) { return v == IsyncVariant::xtau ? "xtau" : "tau"; }

const char* status_str(const RunReport& rep) {
    if (rep.converged) return "converged";
    if (rep.diverged) return "diverged";
    return "k_max";
}

const char* weights_name(WeightStrategy w) {
    return w == WeightStrategy::multiplicity ? "multiplicity" : "restricted";
}

// ---------------------------------------------------------------------------
// Subcommands.
// ---------------------------------------------------------------------------

int cmd_solve(const Experiment& ex) {
    const Problem pr = build_problem(ex);
    const bool want_trace = ex.trace && ex.engine == "sim";
    if (ex.trace && !want_trace)
        std::cerr << "note: --trace applies to the sim engine only; no trace.csv written\n";
    const RunOutcome run = execute(pr, ex.cfg, ex.delays, ex.engine, want_trace);
    write_output(ex.out, "report.json", report_to_json(run.report));
    write_output(ex.out, "residuals.csv", residuals_to_csv(run.report));
    if (want_trace) write_output(ex.out, "trace.csv", trace_to_csv(run.trace));
    std::cout << "solve: engine=" << ex.engine << " n=" << pr.dec.global_n << " p=" << pr.dec.p
              << " iterations=" << fmt_double(run.report.iterations)
              << " final_residual=" << fmt_double(run.report.final_residual)
              << " status=" << status_str(run.report) << "\n";
    return run.report.converged ? 0 : 1;
}

int cmd_sweep(const Experiment& ex) {
    const Problem pr = build_problem(ex);
    std::string csv =
        "# sweep csv v1\n"
        "theta,zeta,isync,rep,seed,iterations,coarse_solves,k_over_c,final_residual,"
        "sim_time,converged,status\n";
    std::size_t rows = 0, ok = 0;
    for (double theta : ex.thetas) {
        for (std::size_t zeta : ex.zetas) {
            for (IsyncVariant isv : ex.isyncs) {
                for (std::size_t rep = 0; rep < ex.reps; ++rep) {
                    SolverConfig cfg = ex.cfg;
                    cfg.theta = theta;
                    cfg.zeta = zeta;
                    cfg.isync = isv;
                    DelaySchedule delays = ex.delays;
                    delays.seed = ex.delays.seed + rep;
                    std::string prefix = fmt_double(theta) + "," + zeta_str(zeta) + "," +
                                         isync_str(isv) + "," + std::to_string(rep) + "," +
                                         std::to_string(delays.seed) + ",";
                    ++rows;
                    try {
                        const RunOutcome run = execute(pr, cfg, delays, ex.engine, false);
                        const RunReport& r = run.report;
                        csv += prefix + fmt_double(r.iterations) + "," +
                               std::to_string(r.coarse_solves) + "," +
                               fmt_double(r.identical_corrections_avg) + "," +
                               fmt_double(r.final_residual) + "," + fmt_double(r.sim_time) + "," +
                               (r.converged ? "1" : "0") + "," + status_str(r) + "\n";
                        if (r.converged) ++ok;
                    } catch (const std::exception& e) {
                        // an individual run failure becomes a row; the sweep continues
                        csv += prefix + "0,0,0,0,0,0,error\n";
                        std::cerr << "sweep run failed (" << prefix << "): " << e.what() << "\n";
                    }
                }
            }
        }
    }
    write_output(ex.out, "sweep.csv", csv);
    std::cout << "sweep: " << rows << " rows, " << ok << " converged\n";
    return ok == rows ? 0 : 1;
}

int cmd_certify(const Experiment& ex) {
    auto [A, b] = assemble_poisson(ex.prob);
    (void)b;
    Decomposition dec = partition_box(ex.grid, ex.procs, ex.overlap);
    if (ex.strategy != dec.strategy) dec = build_weights(dec, ex.strategy);
    const CoarseSpace coarse =
        ex.coarse_op == "selection" ? selection_coarse(A, dec) : build_coarse(dec, A);
    const OperatorBundle bundle = build_operator_bundle(A, dec, &coarse);
    char inst[160];
    std::snprintf(inst, sizeof inst, "poisson %zux%zux%zu procs %zux%zux%zu overlap %zu %s %s",
                  ex.grid[0], ex.grid[1], ex.grid[2], ex.procs[0], ex.procs[1], ex.procs[2],
                  ex.overlap, weights_name(ex.strategy), ex.coarse_op.c_str());
    const std::string cert = certificate_json(inst, A, bundle);
    write_output(ex.out, "certificate.json", cert);
    const CheckResult lemma = check_lemma_condition(bundle);
    std::cout << "certify: " << inst << " lemma_rho=" << fmt_double(lemma.rho)
              << (lemma.convergent ? " convergent" : " not-convergent") << "\n";
    return 0;
}

int cmd_imbalance(const Experiment& ex) {
    if (ex.engine == "sync")
        throw std::invalid_argument(
            "--engine: imbalance compares sync against an async engine; choose sim or threads");
    const Problem pr = build_problem(ex);
    const std::size_t p = pr.dec.p, m = ex.max_slowdown;
    if (m > p) throw std::invalid_argument("--max-slowdown: must be <= process count " +
                                           std::to_string(p));

    // group g = processes [g*p/m, (g+1)*p/m), slowed by factor g+1
    std::vector<std::size_t> group(p);
    DelaySchedule delays = ex.delays;
    delays.slowdowns.assign(p, 1.0);
    for (std::size_t s = 0; s < p; ++s) {
        group[s] = s * m / p;
        delays.slowdowns[s] = static_cast<double>(group[s] + 1);
    }

    const RunOutcome sync_run = execute(pr, ex.cfg, ex.delays, "sync", false);
    const RunOutcome async_run = execute(pr, ex.cfg, delays, ex.engine, false);

    std::string csv =
        "# imbalance csv v1\n"
        "engine,group,slowdown,processes,iterations,coarse_solves,k_over_c,final_residual,"
        "sim_time,converged\n";
    auto all_row = [&](const std::string& engine, const RunReport& r) {
        csv += engine + ",-1,0," + std::to_string(p) + "," + fmt_double(r.iterations) + "," +
               std::to_string(r.coarse_solves) + "," + fmt_double(r.identical_corrections_avg) +
               "," + fmt_double(r.final_residual) + "," + fmt_double(r.sim_time) + "," +
               (r.converged ? "1" : "0") + "\n";
    };
    all_row("sync", sync_run.report);
    all_row(ex.engine, async_run.report);

    for (std::size_t g = 0; g < m; ++g) {
        long long fine = 0, inst_max = 0, inst_sum = 0;
        std::size_t count = 0;
        for (std::size_t s = 0; s < p; ++s) {
            if (group[s] != g) continue;
            ++count;
            fine += async_run.fine_per_process[s];
            inst_sum += async_run.installs_per_process[s];
            inst_max = std::max(inst_max, async_run.installs_per_process[s]);
        }
        const double iters = static_cast<double>(fine) / static_cast<double>(count);
        const double koc =
            inst_sum > 0 ? static_cast<double>(fine) / static_cast<double>(inst_sum) : 0.0;
        csv += ex.engine + "," + std::to_string(g) + "," + std::to_string(g + 1) + "," +
               std::to_string(count) + "," + fmt_double(iters) + "," + std::to_string(inst_max) +
               "," + fmt_double(koc) + "," + fmt_double(async_run.report.final_residual) + "," +
               fmt_double(async_run.report.sim_time) + "," +
               (async_run.report.converged ? "1" : "0") + "\n";
    }
    write_output(ex.out, "imbalance.csv", csv);
    std::cout << "imbalance: m=" << m << " sync=" << status_str(sync_run.report)
              << " async=" << status_str(async_run.report) << "\n";
    return sync_run.report.converged && async_run.report.converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Schwarz-type solver toolkit: synchronous and asynchronous one- and "
                 "two-level solvers, delay-programmable simulation, and convergence "
                 "certificates"};
    app.require_subcommand(1);

    RawOptions raw_solve, raw_sweep, raw_certify, raw_imbalance;
    raw_sweep.engine = "sim";
    raw_imbalance.engine = "sim";
    Registry reg_solve, reg_sweep, reg_certify, reg_imbalance;

    CLI::App* solve = app.add_subcommand("solve", "run one configured solve");
    register_common(solve, raw_solve, reg_solve);
    CLI::App* sweep = app.add_subcommand("sweep", "run a theta x zeta x isync sweep");
    register_common(sweep, raw_sweep, reg_sweep);
    CLI::App* certify = app.add_subcommand("certify", "emit a convergence-condition certificate");
    register_common(certify, raw_certify, reg_certify);
    CLI::App* imbalance =
        app.add_subcommand("imbalance", "compare sync vs async under grouped slowdowns");
    register_common(imbalance, raw_imbalance, reg_imbalance);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RawOptions* raw = nullptr;
        Registry* reg = nullptr;
        if (app.got_subcommand(solve)) {
            raw = &raw_solve;
            reg = &reg_solve;
        } else if (app.got_subcommand(sweep)) {
            raw = &raw_sweep;
            reg = &reg_sweep;
        } else if (app.got_subcommand(certify)) {
            raw = &raw_certify;
            reg = &reg_certify;
        } else {
            raw = &raw_imbalance;
            reg = &reg_imbalance;
        }
        if (!raw->config_file.empty()) apply_config_file(raw->config_file, *reg);
        const Experiment ex = materialize(*raw);
        if (app.got_subcommand(solve)) return cmd_solve(ex);
        if (app.got_subcommand(sweep)) return cmd_sweep(ex);
        if (app.got_subcommand(certify)) return cmd_certify(ex);
        return cmd_imbalance(ex);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
