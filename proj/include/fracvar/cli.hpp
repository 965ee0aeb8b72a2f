#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/problem_file.hpp"
#include "fracvar/report.hpp"
#include "fracvar/solvers.hpp"
#include "fracvar/variational.hpp"

// Command implementations behind the CLI binary. Exit codes:
//   0  success (solves: converged)
//   2  problem-file / input validation error
//   3  expression evaluation error or non-finite output value
//   4  solver did not converge (bundle is still written)
//   5  abnormal isoperimetric case, singular constraint, or root-find failure
//
// Keeping these as functions lets the tests drive the exact CLI paths
// in-process.

namespace fracvar::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_eval = 3;
inline constexpr int exit_nonconvergence = 4;
inline constexpr int exit_constraint = 5;

namespace detail {

inline int map_exception(const std::exception& e, std::ostream& err) {
    err << "error: " << e.what() << "\n";
    try {
        throw;
    } catch (const EvalError&) {
        return exit_eval;
    } catch (const UnboundVariableError&) {
        return exit_eval;
    } catch (const SerializationError&) {
        return exit_eval;
    } catch (const AbnormalCase&) {
        return exit_constraint;
    } catch (const SingularConstraint&) {
        return exit_constraint;
    } catch (const RootFindFailure&) {
        return exit_constraint;
    } catch (const std::exception&) {
        return exit_validation;
    }
}

inline std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline SolveReport dispatch_solve(const Problem& p, const SolverConfig& cfg) {
    if (std::holds_alternative<IsoperimetricKind>(p.kind)) return solve_isoperimetric(p, cfg);
    if (std::holds_alternative<HolonomicKind>(p.kind)) return solve_holonomic(p, cfg);
    if (std::holds_alternative<HerglotzKind>(p.kind)) return solve_herglotz(p, cfg);
    return solve_plain(p, cfg);
}

inline unsigned sweep_workers() {
    const char* env = std::getenv("FRACVAR_THREADS");
    if (!env) return 1;
    const long v = std::strtol(env, nullptr, 10);
    if (v <= 1) return 1;
    const unsigned hc = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<long>(v, hc));
}

} // namespace detail

// deriv: sample an expression in t, apply the left derivative, emit CSV.
inline int run_deriv(const std::string& file, const std::string& function_expr,
                     std::optional<double> at, const std::string& outdir,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        ProblemFile pf = load_problem_file(file);
        ExprPtr f = parse(function_expr);
        f = substitute(f, pf.user_params);
        for (const auto& v : free_vars(f))
            if (v != "t") throw UnknownIdentifierError(v);
        Program prog = compile(f, {"t"});

        SampledFunction x(pf.grid, 1);
        std::vector<double> slot(1);
        for (std::size_t k = 0; k <= pf.grid->n; ++k) {
            slot[0] = pf.grid->nodes[k];
            x.values[k] = prog.run(slot);
        }
        SampledFunction d = ck_deriv(x, pf.params);
        std::filesystem::create_directories(outdir);
        write_deriv_csv(detail::join(outdir, "solution.csv"), x, d);
        if (at) {
            std::size_t best = 0;
            for (std::size_t k = 1; k <= pf.grid->n; ++k)
                if (std::abs(pf.grid->nodes[k] - *at) < std::abs(pf.grid->nodes[best] - *at))
                    best = k;
            out << "ckd_x(t=" << fracvar::detail::fmt17(pf.grid->nodes[best])
                << ") = " << fracvar::detail::fmt17(d.values[best]) << "\n";
        }
        return exit_ok;
    } catch (const std::exception& e) {
        return detail::map_exception(e, err);
    }
}

// solve: dispatch on the problem kind, write report.json + solution.csv.
inline int run_solve(const std::string& file, const std::string& outdir,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        ProblemFile pf = load_problem_file(file);
        if (!pf.problem)
            throw ProblemFileError("file has no [lagrangian]/[boundary]; nothing to solve");
        SolveReport r = detail::dispatch_solve(*pf.problem, pf.config);

        std::filesystem::create_directories(outdir);
        SampledFunction d = trajectory_deriv(r.x, pf.params);
        write_solution_csv(detail::join(outdir, "solution.csv"), r.x, d,
                           r.diagnostics.el_residual);
        write_report_json(detail::join(outdir, "report.json"), pf, r);
        out << (r.converged ? "converged" : "did not converge") << ", J = "
            << fracvar::detail::fmt17(r.diagnostics.J_value)
            << ", el_residual_norm = "
            << fracvar::detail::fmt17(r.diagnostics.el_residual_norm) << "\n";
        return r.converged ? exit_ok : exit_nonconvergence;
    } catch (const std::exception& e) {
        return detail::map_exception(e, err);
    }
}

// sweep: re-solve while stepping alpha or rho; one CSV row per sample.
inline int run_sweep(const std::string& file, const std::string& param, double from,
                     double to, long steps, const std::string& outdir,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        if (param != "rho" && param != "alpha")
            throw DomainError("--param must be rho or alpha");
        if (steps < 2) throw DomainError("--steps must be >= 2");
        ProblemFile pf = load_problem_file(file);
        if (!pf.problem)
            throw ProblemFileError("file has no [lagrangian]/[boundary]; nothing to sweep");
        for (long i = 0; i < steps; ++i) {
            const double v = from + (to - from) * i / static_cast<double>(steps - 1);
            if (param == "alpha" && !(v > 0.0 && v < 1.0))
                throw DomainError("alpha sweep leaves (0,1)");
            if (param == "rho" && !(v > 0.0))
                throw DomainError("rho sweep leaves (0,inf)");
        }

        const Problem& base = *pf.problem;
        std::vector<SweepRow> rows(static_cast<std::size_t>(steps));
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= rows.size()) return;
                const double v = from + (to - from) * static_cast<double>(i) /
                                             static_cast<double>(steps - 1);
                SweepRow row;
                row.param = v;
                try {
                    FracParams fp(param == "alpha" ? v : base.params.alpha,
                                  param == "rho" ? v : base.params.rho);
                    GridPtr g = param == "rho"
                                    ? make_grid(base.grid->a, base.grid->b, base.grid->n,
                                                v, base.grid->spacing)
                                    : base.grid;
                    ProblemKind kind = base.kind;
                    if (auto* s = std::get_if<SplitDomainKind>(&kind)) s->node = 0;
                    Problem p = make_problem(base.lagrangian, fp, g, base.bc_left,
                                             base.bc_right, std::move(kind));
                    SolveReport r = detail::dispatch_solve(p, pf.config);
                    row.J = r.diagnostics.J_value;
                    row.el_residual_norm = r.diagnostics.el_residual_norm;
                    row.converged = r.converged;
                } catch (const std::exception&) {
                    row.converged = false; // best-effort row, zeros recorded
                }
                rows[i] = row;
            }
        };
        const unsigned nw = detail::sweep_workers();
        if (nw <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < nw; ++w) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        std::filesystem::create_directories(outdir);
        write_sweep_csv(detail::join(outdir, "sweep.csv"), rows);
        std::size_t ok = 0;
        for (const auto& r : rows) ok += r.converged ? 1 : 0;
        out << ok << "/" << rows.size() << " rows converged\n";
        return ok >= 1 ? exit_ok : exit_nonconvergence;
    } catch (const std::exception& e) {
        return detail::map_exception(e, err);
    }
}

// check: recompute the full certificate for a stored trajectory; no solving.
inline int run_check(const std::string& file, const std::string& solution_csv,
                     const std::string& outdir, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    try {
        ProblemFile pf = load_problem_file(file);
        if (!pf.problem)
            throw ProblemFileError("file has no [lagrangian]/[boundary]; nothing to check");
        SampledFunction x = read_solution_csv(solution_csv, pf.grid, pf.problem->m());
        Diagnostics d = compute_diagnostics(x, *pf.problem);
        std::filesystem::create_directories(outdir);
        write_check_json(detail::join(outdir, "report.json"), pf, d);
        out << "J = " << fracvar::detail::fmt17(d.J_value) << ", el_residual_norm = "
            << fracvar::detail::fmt17(d.el_residual_norm) << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        return detail::map_exception(e, err);
    }
}

} // namespace fracvar::cli
