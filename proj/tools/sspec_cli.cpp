// Command-line front end: operator identity suite, region maps, weak solves,
// coercivity trials, resolvent bound checks and trace-norm estimation.
//
// Exit codes: 0 success, 1 property/bound violation, 2 invalid input,
// 3 numerical singularity.

#include "sspec/assembly.hpp"
#include "sspec/io.hpp"
#include "sspec/operators.hpp"
#include "sspec/regions.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

using nlohmann::json;
using namespace sspec;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_violation = 1;
constexpr int exit_invalid = 2;
constexpr int exit_singular = 3;

void emit_json(const json& j, const std::string& out_path) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        atomic_write_file(out_path, text);
}

void emit_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        atomic_write_file(out_path, text);
}

struct DomainOptions {
    std::vector<double> lo, hi;
    std::vector<int> res;
    std::string geometry = "hyperbolic";
    std::string bc = "dirichlet";
    double s0 = 0.0;
    double s1 = 0.0;
    std::vector<double> s_vec;
    double b = 0.0;
    bool b_set = false;
    std::string trace_norm = "estimate";
    double trace_safety = 1.0;
    std::string robin_mode = "proof";
    unsigned long long seed = 42;

    void attach(CLI::App* cmd, bool with_spectral = true) {
        cmd->add_option("--lo", lo, "lower box bounds (comma separated)")
            ->required()
            ->delimiter(',');
        cmd->add_option("--hi", hi, "upper box bounds")->required()->delimiter(',');
        cmd->add_option("--res", res, "cells per axis (single value broadcasts)")
            ->required()
            ->delimiter(',');
        cmd->add_option("--geometry", geometry, "hyperbolic | spherical")
            ->check(CLI::IsMember({"hyperbolic", "spherical"}));
        if (with_spectral) {
            cmd->add_option("--bc", bc, "dirichlet | robin")
                ->check(CLI::IsMember({"dirichlet", "robin"}));
            cmd->add_option("--s0", s0, "real part of s");
            cmd->add_option("--s1", s1, "modulus of the imaginary part of s");
            cmd->add_option("--s-vec", s_vec, "full imaginary vector of s (overrides --s1)")
                ->delimiter(',');
            cmd->add_option("--b", b, "Robin boundary coefficient")->trigger_on_parse()
                ->each([this](const std::string&) { b_set = true; });
            cmd->add_option("--trace-norm", trace_norm,
                            "trace operator norm: a number or 'estimate'");
            cmd->add_option("--trace-safety", trace_safety,
                            "multiplier applied to an estimated trace norm");
            cmd->add_option("--robin-mode", robin_mode, "statement | proof")
                ->check(CLI::IsMember({"statement", "proof"}));
            cmd->add_option("--seed", seed, "random seed");
        }
    }

    Grid make_grid() const {
        if (lo.size() != hi.size()) throw std::invalid_argument("--lo/--hi length mismatch");
        std::vector<int> r = res;
        if (r.size() == 1) r.assign(lo.size(), r[0]);
        if (r.size() != lo.size()) throw std::invalid_argument("--res length mismatch");
        const Geometry g = geometry == "hyperbolic" ? Geometry::hyperbolic : Geometry::spherical;
        return Grid(BoxDomain(lo, hi, g), r);
    }

    FormSpec make_spec(const Grid& grid, double resolved_trace) const {
        FormSpec spec;
        spec.geometry = grid.domain.geometry;
        spec.bc = parse_boundary_condition(bc);
        std::vector<double> imag(static_cast<std::size_t>(grid.dim()), 0.0);
        if (!s_vec.empty()) {
            if (static_cast<int>(s_vec.size()) != grid.dim())
                throw std::invalid_argument("--s-vec length must match the dimension");
            imag = s_vec;
        } else if (grid.dim() >= 1) {
            imag[0] = s1;
        }
        spec.s = Paravector(s0, imag);
        if (spec.bc == BoundaryCondition::robin) {
            if (!b_set) throw std::invalid_argument("robin problems require --b");
            spec.b = b;
        }
        spec.trace_norm = resolved_trace;
        spec.robin_mode = parse_robin_mode(robin_mode);
        return spec;
    }

    // number, or 'estimate' -> discrete estimator times the safety factor
    double resolve_trace_norm(const Grid& grid) const {
        if (trace_norm == "estimate") return trace_safety * estimate_trace_norm(grid);
        return std::stod(trace_norm);
    }

    json echo(const Grid& grid, double resolved_trace) const {
        json j{{"lo", lo},           {"hi", hi},
               {"res", grid.res},    {"geometry", geometry},
               {"bc", bc},           {"s0", s0},
               {"s1", s_vec.empty() ? s1 : Paravector(0.0, s_vec).imag_modulus()},
               {"b", b_set ? json(b) : json()},
               {"trace_norm", resolved_trace},
               {"robin_mode", robin_mode},
               {"seed", seed}};
        return j;
    }
};

GridFunction make_rhs(const Grid& grid, const std::string& rhs_spec, unsigned long long seed) {
    if (rhs_spec == "random") {
        std::mt19937_64 rng(seed);
        return random_grid_function(grid, rng, false);
    }
    return read_grid_function_csv(grid, rhs_spec);
}

// ---------------------------------------------------------------- identities

struct IdentityStats {
    double max_resid = 0.0;
    void update(const PolyField& resid, const PolyField& input) {
        const double rel = resid.max_abs_coeff() / (1.0 + input.max_abs_coeff());
        max_resid = std::max(max_resid, rel);
    }
};

int cmd_identities(const std::vector<int>& n_list, int trials, unsigned long long seed,
                   const std::string& out, bool canary) {
    constexpr double tol = 1e-10;
    for (int n : n_list)
        if (n < 2 || n > 4) throw std::invalid_argument("identity suite supports n in 2..4");

    IdentityStats euclid, hyper, euler_dirac, spherical, no_drift;
    std::mt19937_64 rng(seed);
    for (int n : n_list) {
        const double alpha = structure_constants(n).alpha;
        const int y_axis = n - 1;
        for (int trial = 0; trial < trials; ++trial) {
            const PolyField f = random_poly_field(n, 3, rng);

            euclid.update(dirac_euclidean(dirac_euclidean(f)) + laplacian(f), f);

            const PolyField dh2 = dirac_hyperbolic(dirac_hyperbolic(f));
            PolyField drift = f.derive(y_axis)
                                  .coord_mul(detail::unit_exponent(n, y_axis))
                                  .scale(2.0 * alpha);
            PolyField closed = canary ? dh_squared_formula_no_drift(f) - drift
                                      : dh_squared_formula(f);
            hyper.update(closed - dh2, f);
            no_drift.update(dh_squared_formula_no_drift(f) - dh2, f);

            euler_dirac.update(euler_dirac_identity_residual(f), f);

            spherical.update(ds_squared_formula(f) - dirac_spherical(dirac_spherical(f)), f);
        }
    }

    json report{{"config", json{{"n_list", n_list},
                                {"trials", trials},
                                {"seed", seed},
                                {"tolerance", tol},
                                {"canary", canary}}}};
    bool failed = false;
    if (trials > 0) {
        json ids = json::array();
        const std::pair<const char*, IdentityStats*> entries[] = {
            {"dirac_euclidean_square", &euclid},
            {"dirac_hyperbolic_square", &hyper},
            {"euler_dirac_commutation", &euler_dirac},
            {"dirac_spherical_square", &spherical},
        };
        for (auto [name, st] : entries) {
            const bool pass = st->max_resid <= tol;
            failed = failed || !pass;
            ids.push_back({{"name", name}, {"max_residual", st->max_resid}, {"pass", pass}});
        }
        report["identities"] = ids;
        // diagnostic only: the short closed form must disagree with the square
        report["no_drift_variant"] = {{"max_residual", no_drift.max_resid},
                                      {"differs", no_drift.max_resid > tol}};
    } else {
        report["identities"] = json::array();
    }
    emit_json(report, out);
    return failed ? exit_violation : exit_ok;
}

// -------------------------------------------------------------------- region

int cmd_region(const std::string& kind_str, RegionParams params, bool have_box,
               const std::vector<double>& lo, const std::vector<double>& hi,
               const std::string& c_p_str, double s0_min, double s0_max, int s0_res,
               double s1_min, double s1_max, int s1_res, const std::string& out,
               const std::string& summary_out, bool emit_plot) {
    const RegionKind kind = parse_region_kind(kind_str);
    if (have_box) {
        const Geometry g = is_hyperbolic(kind) ? Geometry::hyperbolic : Geometry::spherical;
        const BoxDomain box(lo, hi, g);
        const DomainExtrema ext = domain_extrema(box);
        params.n = box.dim;
        params.m = ext.m;
        params.M = ext.M;
        if (c_p_str == "auto") params.c_p = poincare_constant_box(box);
    }
    if (!c_p_str.empty() && c_p_str != "auto") params.c_p = std::stod(c_p_str);

    const RegionMap map = region_sample(kind, params, s0_min, s0_max, s1_min, s1_max, s0_res, s1_res);
    const std::string csv = region_map_to_csv(map);
    emit_text(csv, out);

    json summary = region_map_summary(map);
    summary["config"] = {{"kind", kind_str},
                         {"s0_min", s0_min},
                         {"s0_max", s0_max},
                         {"s0_res", s0_res},
                         {"s1_min", s1_min},
                         {"s1_max", s1_max},
                         {"s1_res", s1_res},
                         {"out", out}};
    if (!summary_out.empty()) emit_json(summary, summary_out);

    if (emit_plot && !out.empty()) {
        std::ostringstream gp;
        gp << "# gnuplot script for the region map\n"
           << "set datafile separator ','\n"
           << "set xlabel 's0'\nset ylabel 's1'\n"
           << "set view map\n"
           << "splot '" << out << "' every ::1 using 1:2:3 with points palette pt 5 ps 0.5 "
           << "title 'admissible'\n"
           << "pause -1\n";
        atomic_write_file(out + ".gp", gp.str());
    }
    return exit_ok;
}

// --------------------------------------------------------------------- solve

int finish_singular(const SolveReport& rep, const json& config, const std::string& out) {
    json j = to_json(rep);
    j["config"] = config;
    emit_json(j, out);
    std::fprintf(stderr, "singular system: possible S-spectrum proximity (pivot_min %.3e)\n",
                 rep.pivot_min);
    return exit_singular;
}

int cmd_solve(const DomainOptions& dom, const std::string& rhs_spec, const std::string& out,
              const std::string& out_solution) {
    const Grid grid = dom.make_grid();
    const double trace = dom.bc == "robin" || dom.trace_norm != "estimate"
                             ? dom.resolve_trace_norm(grid)
                             : std::numeric_limits<double>::quiet_NaN();
    const FormSpec spec = dom.make_spec(grid, trace);
    const GridFunction f = make_rhs(grid, rhs_spec, dom.seed);

    const WeakSolver solver(assemble(grid, spec));
    auto [F, rep] = solver.solve(f);
    const json config = dom.echo(grid, trace);
    if (rep.singular) return finish_singular(rep, config, out);

    json j = to_json(rep);
    j["config"] = config;
    emit_json(j, out);
    if (!out_solution.empty()) write_grid_function_csv(out_solution, F);
    return exit_ok;
}

// ---------------------------------------------------------------- coercivity

int cmd_coercivity(const DomainOptions& dom, int trials, const std::string& out) {
    constexpr double tol = 1e-8;
    const Grid grid = dom.make_grid();
    const double trace = dom.resolve_trace_norm(grid);
    const FormSpec spec = dom.make_spec(grid, trace);
    const FormOperator op = assemble(grid, spec);

    const RegionKind kind = region_kind_for(spec);
    const RegionParams params = region_params_for(op);
    const SPoint s{spec.s.s0, spec.s.imag_modulus()};
    const RegionVerdict verdict = evaluate_region(kind, params, s);
    if (!verdict.admissible)
        throw std::invalid_argument("coercivity certification requires an admissible s for " +
                                    std::string(to_string(kind)));

    std::mt19937_64 rng(dom.seed);
    double min_slack = std::numeric_limits<double>::infinity();
    const bool constrained = spec.bc == BoundaryCondition::dirichlet;
    for (int trial = 0; trial < trials; ++trial) {
        const GridFunction F = random_grid_function(grid, rng, constrained);
        const double q = sc_form_value(op, F, F);
        const double h1 = norm_l2_sq(op, F) + seminorm_d_sq(op, F);
        if (h1 == 0.0) continue;
        min_slack = std::min(min_slack, q / (verdict.constant * h1) - 1.0);
    }

    json j{{"config", dom.echo(grid, trace)},
           {"kind", to_string(kind)},
           {"constant", verdict.constant},
           {"trials", trials},
           {"min_slack_rel", min_slack},
           {"tolerance", tol}};
    emit_json(j, out);
    return min_slack < -tol ? exit_violation : exit_ok;
}

// ----------------------------------------------------------------- resolvent

int cmd_resolvent(const DomainOptions& dom, const std::string& side_str, int trials, double slack,
                  const std::string& out) {
    const Grid grid = dom.make_grid();
    const double trace = dom.bc == "robin" || dom.trace_norm != "estimate"
                             ? dom.resolve_trace_norm(grid)
                             : std::numeric_limits<double>::quiet_NaN();
    const FormSpec spec = dom.make_spec(grid, trace);
    const ResolventSide side = parse_resolvent_side(side_str);
    const WeakSolver solver(assemble(grid, spec));
    const json config = dom.echo(grid, trace);

    std::mt19937_64 rng(dom.seed);
    double max_ratio = 0.0;
    double bound = std::numeric_limits<double>::quiet_NaN();
    bool bound_checked = false;
    bool violated = false;
    json runs = json::array();
    for (int trial = 0; trial < trials; ++trial) {
        const GridFunction f = random_grid_function(grid, rng, false);
        auto [R, rr] = s_resolvent_apply(side, solver, f);
        if (rr.solve.singular) return finish_singular(rr.solve, config, out);
        runs.push_back({{"result_norm_l2", rr.result_norm_l2},
                        {"rhs_norm_l2", rr.solve.rhs_norm_l2},
                        {"bound_ratio", rr.bound_ratio}});
        if (side == ResolventSide::right && std::isfinite(rr.bound)) {
            bound = rr.bound;
            bound_checked = true;
            max_ratio = std::max(max_ratio, rr.bound_ratio);
            if (rr.bound_ratio > 1.0 + slack) violated = true;
        }
    }

    json j{{"config", config},
           {"side", side_str},
           {"trials", trials},
           {"bound", bound},
           {"bound_checked", bound_checked},
           {"max_bound_ratio", bound_checked ? json(max_ratio) : json()},
           {"slack", slack},
           {"runs", runs}};
    emit_json(j, out);
    return violated ? exit_violation : exit_ok;
}

// ---------------------------------------------------------------- trace-norm

int cmd_trace_norm(const DomainOptions& dom, const std::string& out) {
    const Grid grid = dom.make_grid();
    const double est = estimate_trace_norm(grid);
    json j{{"config", json{{"lo", dom.lo}, {"hi", dom.hi}, {"res", grid.res},
                           {"geometry", dom.geometry}}},
           {"trace_norm_estimate", est},
           {"note", "discrete Rayleigh quotient; lower bound of the continuum norm"}};
    emit_json(j, out);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"S-spectrum machinery for Dirac operators on hyperbolic and spherical space"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; flags override file values");
    app.get_config_formatter_base()->valueSeparator('=');

    // identities
    auto* identities = app.add_subcommand("identities", "verify the operator identity suite");
    std::vector<int> n_list{2, 3, 4};
    int id_trials = 200;
    unsigned long long id_seed = 42;
    std::string id_out;
    bool canary = false;
    identities->add_option("--n-list", n_list, "dimensions to test")->delimiter(',');
    identities->add_option("--trials", id_trials, "random fields per dimension");
    identities->add_option("--seed", id_seed, "random seed");
    identities->add_option("--out", id_out, "JSON report path (stdout when empty)");
    identities->add_flag("--canary", canary,
                         "inject a sign flip into the closed form (must fail)");

    // region
    auto* region = app.add_subcommand("region", "sample an admissible-region map");
    std::string kind_str;
    RegionParams rp;
    std::vector<double> r_lo, r_hi;
    std::string c_p_str;
    std::string robin_mode_str = "proof";
    double s0_min = -5, s0_max = 5, s1_min = 0, s1_max = 15;
    int s0_res = 200, s1_res = 300;
    std::string region_out, summary_out;
    bool emit_plot = false;
    region->add_option("--kind", kind_str, "region kind")->required();
    region->add_option("--n", rp.n, "dimension");
    region->add_option("--m", rp.m, "lower domain constant");
    region->add_option("--M", rp.M, "upper domain constant");
    region->add_option("--lo", r_lo, "derive m,M from this box instead")->delimiter(',');
    region->add_option("--hi", r_hi, "upper box bounds")->delimiter(',');
    region->add_option("--b-norm", rp.b_norm, "sup norm of the Robin coefficient");
    region->add_option("--trace-norm", rp.trace_norm, "trace operator norm");
    region->add_option("--c-p", c_p_str, "Poincare constant, or 'auto' with --lo/--hi");
    region->add_option("--robin-mode", robin_mode_str, "statement | proof")
        ->check(CLI::IsMember({"statement", "proof"}));
    region->add_option("--s0-min", s0_min);
    region->add_option("--s0-max", s0_max);
    region->add_option("--s0-res", s0_res);
    region->add_option("--s1-min", s1_min);
    region->add_option("--s1-max", s1_max);
    region->add_option("--s1-res", s1_res);
    region->add_option("--out", region_out, "CSV path (stdout when empty)");
    region->add_option("--summary", summary_out, "JSON summary path");
    region->add_flag("--emit-plot-script", emit_plot, "write a gnuplot script next to the CSV");

    // solve
    auto* solve = app.add_subcommand("solve", "solve Q_s(D) F = f weakly");
    DomainOptions solve_dom;
    solve_dom.attach(solve);
    std::string rhs_spec = "random";
    std::string solve_out, solution_out;
    solve->add_option("--rhs", rhs_spec, "'random' or a nodal CSV path");
    solve->add_option("--out", solve_out, "JSON report path");
    solve->add_option("--out-solution", solution_out, "solution CSV path");

    // coercivity
    auto* coercivity = app.add_subcommand("coercivity", "certify the coercivity constant");
    DomainOptions coer_dom;
    coer_dom.attach(coercivity);
    int coer_trials = 1000;
    std::string coer_out;
    coercivity->add_option("--trials", coer_trials, "random trial fields");
    coercivity->add_option("--out", coer_out, "JSON report path");

    // resolvent
    auto* resolvent = app.add_subcommand("resolvent", "apply the S-resolvent and check bounds");
    DomainOptions res_dom;
    res_dom.attach(resolvent);
    std::string side_str = "right";
    int res_trials = 20;
    double res_slack = 0.05;
    std::string res_out;
    resolvent->add_option("--side", side_str, "left | right")
        ->check(CLI::IsMember({"left", "right"}));
    resolvent->add_option("--trials", res_trials, "random right-hand sides");
    resolvent->add_option("--slack", res_slack, "allowed excess over the bound");
    resolvent->add_option("--out", res_out, "JSON report path");

    // trace-norm
    auto* trace = app.add_subcommand("trace-norm", "estimate the Dirichlet trace norm");
    DomainOptions trace_dom;
    trace_dom.attach(trace, false);
    std::string trace_out;
    trace->add_option("--out", trace_out, "JSON report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    try {
        if (identities->parsed())
            return cmd_identities(n_list, id_trials, id_seed, id_out, canary);
        if (region->parsed()) {
            rp.robin_mode = parse_robin_mode(robin_mode_str);
            const bool have_box = !r_lo.empty() || !r_hi.empty();
            return cmd_region(kind_str, rp, have_box, r_lo, r_hi, c_p_str, s0_min, s0_max,
                              s0_res, s1_min, s1_max, s1_res, region_out, summary_out, emit_plot);
        }
        if (solve->parsed()) return cmd_solve(solve_dom, rhs_spec, solve_out, solution_out);
        if (coercivity->parsed()) return cmd_coercivity(coer_dom, coer_trials, coer_out);
        if (resolvent->parsed())
            return cmd_resolvent(res_dom, side_str, res_trials, res_slack, res_out);
        if (trace->parsed()) return cmd_trace_norm(trace_dom, trace_out);
    } catch (const TraceIterationError& e) {
        std::fprintf(stderr, "numerical failure: %s (last estimate %.6g)\n", e.what(),
                     e.last_estimate);
        return exit_singular;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return exit_invalid;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return exit_invalid;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_invalid;
    }
    return exit_ok;
}
