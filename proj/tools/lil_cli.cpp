// lil_cli: command-line front end for boundary evaluation, implicit solving,
// mixture-lemma verification and crossing experiments.
//
// Exit status: 0 success, 1 failed check or coverage gate, 2 usage, I/O or
// budget error.
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lil/boundaries.hpp"
#include "lil/grids.hpp"
#include "lil/report.hpp"
#include "lil/simulation.hpp"
#include "lil/verify.hpp"

namespace {

using namespace lil;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

// Thrown for flag combinations CLI11 cannot express; reported as usage errors.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

// Numeric validator whose failure message names the value and the valid range.
template <class Pred>
CLI::Validator numeric_check(Pred pred, std::string range) {
    return CLI::Validator(
        [pred, range](std::string& s) -> std::string {
            double x = 0.0;
            try {
                std::size_t pos = 0;
                x = std::stod(s, &pos);
                if (pos != s.size()) throw std::invalid_argument(s);
            } catch (const std::exception&) {
                return "value " + s + " is not a number; valid range " + range;
            }
            if (!pred(x)) return "value " + s + " outside the valid range " + range;
            return {};
        },
        range);
}

CLI::Validator open_interval(double lo, double hi) {
    return numeric_check([lo, hi](double x) { return x > lo && x < hi; }, "(" + num(lo) + ", " + num(hi) + ")");
}

CLI::Validator positive() {
    return numeric_check([](double x) { return x > 0.0; }, "(0, inf)");
}

CLI::Validator at_least(double lo) {
    return numeric_check([lo](double x) { return x >= lo; }, "[" + num(lo) + ", inf)");
}

const std::vector<std::string> kFamilies{"rademacher", "hoeffding", "bernstein", "generic", "anti", "sharper"};

struct SpecFlags {
    BoundarySpec spec;
    std::string family = "generic";
    void attach(CLI::App* app) {
        app->add_option("--family", family, "Boundary family")->check(CLI::IsMember(kFamilies));
        app->add_option("--delta", spec.delta, "Failure probability, in (0, 1)")->check(open_interval(0.0, 1.0));
        app->add_option("--k", spec.k, "Sub-Gaussian constant k, in (0, 1)")->check(open_interval(0.0, 1.0));
        app->add_option("--v", spec.v, "Iterated-log level (sharper family), >= 1")->check(at_least(1));
        app->add_option("--c1", spec.c1, "Anti-concentration constant C1, > 0")->check(positive());
        app->add_option("--c2", spec.c2, "Anti-concentration constant C2, > 0")->check(positive());
        app->add_option("--c173", spec.c173, "Alternative tau0 constant, > 0")->check(positive());
        app->add_flag("--hoeffding-c173", spec.hoeffding_c173, "Use c173 ln(4/delta) as the tau0 threshold");
    }
};

struct PointFlags {
    std::optional<std::int64_t> t;
    std::optional<double> u;
    void attach(CLI::App* app) {
        app->add_option("--t", t, "Time index t >= 1 (sets u = t when --u is absent)")->check(at_least(1));
        app->add_option("--u", u, "Variance proxy value U, > 0")->check(positive());
    }
    double u_value() const {
        if (u) return *u;
        if (t) return static_cast<double>(*t);
        throw UsageError("one of --t or --u is required");
    }
    std::int64_t t_value(const char* why) const {
        if (!t) throw UsageError(std::string("--t is required ") + why);
        return *t;
    }
};

// boundary: evaluates the boundary function itself.
int cmd_boundary(const SpecFlags& sf, const PointFlags& pf, std::optional<double> m, bool explicit_form) {
    const auto& spec = sf.spec;
    if (explicit_form) {
        std::cout << num(explicit_rademacher_boundary(pf.t_value("with --explicit"), spec.delta)) << '\n';
        return kExitOk;
    }
    const double u = pf.u_value();
    if (spec.family == Family::anti) {
        if (!m) throw UsageError("--m is required for the anti family");
        const auto r = anti_rhs(u, spec.delta, *m, spec.c1, spec.k);
        std::cout << (r ? num(*r) : "vacuous") << '\n';
        return kExitOk;
    }
    if (m) {
        const auto r = lil_rhs(spec, u, *m);
        std::cout << (r ? num(*r) : "vacuous") << '\n';
        return kExitOk;
    }
    if (spec.family == Family::sharper) {
        std::cout << num(sharper_boundary(u, std::nullopt, spec.delta, spec.v)) << '\n';
        return kExitOk;
    }
    std::cout << num(stitched_boundary(spec, {u, pf.t})) << '\n';
    return kExitOk;
}

// solve: the implicit envelope radius and the clause that binds it.
int cmd_solve(const SpecFlags& sf, const PointFlags& pf) {
    const auto& spec = sf.spec;
    if (spec.family == Family::anti) {
        std::cout << "radius " << num(solve_anti(pf.t_value("for the anti family"), spec.delta, spec.c1, spec.k))
                  << '\n';
        return kExitOk;
    }
    const auto b = solve_boundary(spec, {pf.u_value(), pf.t});
    std::cout << "radius " << num(b.radius) << '\n' << "binding_clause " << to_string(b.binding_clause) << '\n';
    return kExitOk;
}

GridConfig grid_config(const std::string& grid, double corrupt) {
    GridConfig c;
    if (grid == "small") c.n_u = 4;
    c.corrupt_log_shift = corrupt;
    return c;
}

bool print_suite(const SuiteResult& s) {
    std::cout << (s.passed ? "[PASS] " : "[FAIL] ") << s.name << ": " << s.summary << '\n';
    return s.passed;
}

void print_slack_table(const GridCheck& g) {
    std::cout << "# " << g.name << '\n' << std::setw(12) << "u" << std::setw(26) << "m" << std::setw(26)
              << "log_slack" << std::setw(12) << "rel_error" << "  status\n";
    for (const auto& r : g.rows) {
        std::cout << std::setw(12) << std::setprecision(6) << r.point.u << std::setw(26) << std::setprecision(17)
                  << r.point.m << std::setw(26) << r.log_slack << std::setw(12) << std::setprecision(3)
                  << r.rel_error << "  " << (!r.error.empty() ? "error: " + r.error : r.ok ? "ok" : "VIOLATED")
                  << '\n';
    }
}

int cmd_mixture_verify(int v, const std::string& grid, double corrupt, bool table) {
    const auto c = grid_config(grid, corrupt);
    std::vector<GridCheck> checks;
    if (v == 1) {
        checks.push_back(check_lower_bound_grid(c));
        checks.push_back(check_g_upper_grid(c));
    }
    checks.push_back(check_refined_grid(v, c));
    bool ok = true;
    for (const auto& g : checks) {
        if (table) print_slack_table(g);
        ok = print_suite(grid_suite(g)) && ok;
    }
    ok = print_suite(mass_suite(v)) && ok;
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_verify_all(const std::string& grid, unsigned threads) {
    const bool small = grid == "small";
    const auto c = grid_config(grid, 0.0);
    bool ok = true;
    auto run = [&](const SuiteResult& s) { ok = print_suite(s) && ok; };

    run(solver_certificate_suite());
    std::vector<std::int64_t> ts;
    for (std::int64_t t = 1; t <= (small ? 100000 : 10000000); t = t < 100 ? t + 1 : t * 11 / 10) ts.push_back(t);
    run(explicit_corollary_suite(ts, {0.05, 0.2}));
    run(anti_certificate_suite({1000, 10000, 100000, 1000000}, {0.05, 0.5}));
    run(anti_certificate_suite({1000, 10000, 100000, 1000000}, {0.05, 0.5}, 1e-6));
    run(inequality_suite(small ? 10000 : 100000));
    run(series_suite());
    run(grid_suite(check_lower_bound_grid(c)));
    run(grid_suite(check_g_upper_grid(c)));
    for (int v : {1, 2}) run(grid_suite(check_refined_grid(v, c)));
    for (int v : {1, 2, 3}) run(mass_suite(v));
    run(exact_moment_suite(small ? 20 : 30));
    for (const auto& s : optional_stopping_suites(small ? 2000 : 20000, 10000, 11, threads)) run(s);
    run(one_step_suite(small ? 20000 : 200000, 12));

    CrossingExperiment e;
    e.boundary.family = Family::rademacher;
    e.n_paths = small ? 200 : 2000;
    e.horizon_T = small ? 10000 : 100000;
    const auto r = run_crossing(e, threads);
    run({"coverage two-clause", r.crossing_fraction <= e.boundary.delta,
         std::to_string(r.n_crossed) + " of " + std::to_string(r.n_paths) + " paths crossed (fraction " +
             num(r.crossing_fraction) + ", bound " + num(e.boundary.delta) + ")"});

    std::cout << (ok ? "all suites passed\n" : "one or more suites FAILED\n");
    return ok ? kExitOk : kExitCheckFailed;
}

struct SimulateFlags {
    std::string config;
    std::optional<std::string> family, direction, flavor, rule, model;
    std::optional<double> delta, k, c1, budget;
    std::optional<std::int64_t> horizon, paths;
    std::optional<std::uint64_t> seed;
    bool gate = false;
    std::string out, format = "json";
    std::optional<std::int64_t> dump_index;
    std::string dump_out;
};

CrossingExperiment build_experiment(const SimulateFlags& f) {
    CrossingExperiment e;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw std::runtime_error("cannot read config file " + f.config);
        e = experiment_from_json(nlohmann::json::parse(in));
    }
    if (f.family) e.boundary.family = family_from_string(*f.family);
    if (f.delta) e.boundary.delta = *f.delta;
    if (f.k) e.boundary.k = *f.k;
    if (f.c1) e.boundary.c1 = *f.c1;
    if (f.horizon) e.horizon_T = *f.horizon;
    if (f.paths) e.n_paths = *f.paths;
    if (f.seed) e.master_seed = *f.seed;
    if (f.direction) e.direction = direction_from_string(*f.direction);
    if (f.flavor) e.flavor = flavor_from_string(*f.flavor);
    if (f.rule) e.upper_rule = upper_rule_from_string(*f.rule);
    if (f.model) {
        nlohmann::json j{{"kind", *f.model}};
        e.model = model_from_json(j);
    }
    if (f.budget) e.step_budget = *f.budget;
    return e;
}

int cmd_simulate(const SimulateFlags& f, unsigned threads) {
    const auto e = build_experiment(f);
    e.validate();
    if (f.dump_index) {
        if (f.dump_out.empty()) throw UsageError("--dump-path needs --dump-out");
        std::ostringstream os;
        dump_path(e, *f.dump_index, os);
        write_file_atomically(f.dump_out, os.str());
    }
    const auto r = run_crossing(e, threads);
    const auto fmt = report_format_from_string(f.format);
    if (f.out.empty())
        std::cout << render_report(r, fmt);
    else
        write_report(r, f.out, fmt);
    if (f.gate && !(r.crossing_fraction <= e.boundary.delta)) {
        std::cerr << "coverage gate failed: crossing fraction " << num(r.crossing_fraction) << " > delta "
                  << num(e.boundary.delta) << '\n';
        return kExitCheckFailed;
    }
    return kExitOk;
}

unsigned default_threads() {
    if (const char* env = std::getenv("LIL_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n >= 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
        std::cerr << "ignoring LIL_THREADS=" << env << " (expected a nonnegative integer)\n";
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-time iterated-logarithm boundaries for martingales"};
    app.require_subcommand(1);
    unsigned threads = default_threads();

    SpecFlags bspec, sspec;
    PointFlags bpoint, spoint;
    std::optional<double> m;
    bool explicit_form = false;
    auto* boundary = app.add_subcommand("boundary", "Evaluate a boundary at (t or u[, m])");
    bspec.attach(boundary);
    bpoint.attach(boundary);
    boundary->add_option("--m", m, "Evaluate the iterated-log clause at |M| = m, > 0")->check(positive());
    boundary->add_flag("--explicit", explicit_form, "Closed-form Rademacher corollary at time --t");

    auto* solve = app.add_subcommand("solve", "Solve the implicit boundary for its envelope radius");
    sspec.attach(solve);
    spoint.attach(solve);

    int mv_level = 1;
    std::string mv_grid = "full";
    double corrupt = 0.0;
    bool table = false;
    auto* mixture = app.add_subcommand("mixture-verify", "Check the mixture-moment bounds on their grids");
    mixture->add_option("--v", mv_level, "Mixing level v (1, 2 or 3)")->check(CLI::Range(1, 3));
    mixture->add_option("--grid", mv_grid, "Grid size")->check(CLI::IsMember({"small", "full"}));
    mixture->add_option("--corrupt", corrupt, "Negative control: tighten every bound by this many nats, >= 0")
        ->check(at_least(0));
    mixture->add_flag("--table", table, "Print the per-point slack table");

    SimulateFlags sf;
    auto* simulate = app.add_subcommand("simulate", "Run a boundary-crossing experiment");
    simulate->add_option("--config", sf.config, "JSON experiment file (same schema as the report's experiment block)");
    simulate->add_option("--family", sf.family, "Boundary family")->check(CLI::IsMember(kFamilies));
    simulate->add_option("--delta", sf.delta, "Failure probability, in (0, 1)")->check(open_interval(0.0, 1.0));
    simulate->add_option("--k", sf.k, "Sub-Gaussian constant k, in (0, 1)")->check(open_interval(0.0, 1.0));
    simulate->add_option("--c1", sf.c1, "Anti-concentration constant C1, > 0")->check(positive());
    simulate->add_option("--horizon", sf.horizon, "Horizon T, >= 1")->check(at_least(1));
    simulate->add_option("--paths", sf.paths, "Number of paths, >= 1")->check(at_least(1));
    simulate->add_option("--seed", sf.seed, "Master seed");
    simulate->add_option("--direction", sf.direction, "upper or lower")->check(CLI::IsMember({"upper", "lower"}));
    simulate->add_option("--flavor", sf.flavor, "Variance proxy")
        ->check(CLI::IsMember({"time", "sum_c_sq", "bernstein", "hoeffding_q", "relaxed"}));
    simulate->add_option("--rule", sf.rule, "Upper stopping rule")
        ->check(CLI::IsMember({"two_clause", "lln_only", "initial_segment"}));
    simulate->add_option("--model", sf.model, "Increment model")
        ->check(CLI::IsMember({"rademacher", "bounded_e2", "moment_family"}));
    simulate->add_option("--budget", sf.budget, "Cap on paths * horizon, > 0")->check(positive());
    simulate->add_flag("--gate", sf.gate, "Exit 1 when the crossing fraction exceeds delta");
    simulate->add_option("--out", sf.out, "Write the report here instead of stdout");
    simulate->add_option("--format", sf.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    simulate->add_option("--dump-path", sf.dump_index, "Also write the full trajectory of this path index")
        ->check(at_least(0));
    simulate->add_option("--dump-out", sf.dump_out, "CSV destination for --dump-path");

    std::string va_grid = "full";
    auto* verify_all = app.add_subcommand("verify-all", "Run every invariant suite");
    verify_all->add_option("--grid", va_grid, "Grid size")->check(CLI::IsMember({"small", "full"}));

    for (auto* sub : {simulate, verify_all})
        sub->add_option("--threads", threads, "Worker threads (0 = all cores; default $LIL_THREADS or 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*boundary) {
            bspec.spec.family = family_from_string(bspec.family);
            bspec.spec.validate();
            return cmd_boundary(bspec, bpoint, m, explicit_form);
        }
        if (*solve) {
            sspec.spec.family = family_from_string(sspec.family);
            sspec.spec.validate();
            return cmd_solve(sspec, spoint);
        }
        if (*mixture) return cmd_mixture_verify(mv_level, mv_grid, corrupt, table);
        if (*simulate) return cmd_simulate(sf, threads);
        if (*verify_all) return cmd_verify_all(va_grid, threads);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitUsage;
    } catch (const budget_error& e) {
        std::cerr << "budget error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
