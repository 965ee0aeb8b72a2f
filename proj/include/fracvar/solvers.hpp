#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/expr.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/grid.hpp"
#include "fracvar/problem.hpp"
#include "fracvar/variational.hpp"

// Direct (Ritz) minimization of the discretized functionals. The
// Euler-Lagrange equation couples a left derivative with a right-sided one,
// so marching schemes do not apply; instead the discrete J is minimized over
// node values and the residual instrumentation serves as the certificate.
//
// Non-convergence is reported through SolveReport::converged rather than an
// exception so callers can still persist the bundle.

namespace fracvar {

enum class LineSearch { Backtracking };

struct SolverConfig {
    std::size_t max_iters = 20000;
    double grad_tol = 1e-8;
    double constraint_tol = 1e-8;
    double fd_step = 1e-6;
    LineSearch line_search = LineSearch::Backtracking;
    double penalty_growth = 10.0; // multiplier bracket expansion factor
    std::uint64_t seed = 12345;

    void validate() const {
        if (max_iters < 1) throw DomainError("SolverConfig: max_iters must be >= 1");
        if (!(grad_tol > 0.0)) throw DomainError("SolverConfig: grad_tol must be > 0");
        if (!(constraint_tol > 0.0))
            throw DomainError("SolverConfig: constraint_tol must be > 0");
        if (!(fd_step > 1e-10) || !(fd_step < 1e-2))
            throw DomainError("SolverConfig: fd_step must lie in (1e-10, 1e-2)");
        if (!(penalty_growth > 1.0))
            throw DomainError("SolverConfig: penalty_growth must be > 1");
    }
};

struct SolveReport {
    SampledFunction x;
    std::optional<double> multiplier;              // isoperimetric lambda
    std::optional<SampledFunction> multiplier_fn;  // holonomic lambda(t)
    std::optional<double> rho_opt;
    Diagnostics diagnostics;
    std::size_t iterations = 0;
    bool converged = false;
    double gradient_norm = 0;
    std::vector<double> objective_trace;  // accepted iterates, non-increasing

    bool sufficiency = false;      // convexity flag => extremal is a minimizer
    bool flat_objective = false;   // optimize_rho: J(rho) constant over the scan
    bool boundary_optimum = false; // optimize_rho: best rho hit the range edge
    std::optional<double> stationarity_integral;
    std::optional<double> z_b;                 // Herglotz objective value
    std::optional<double> k_residual_norm;     // iso: residual norm of K = L + lambda g
};

// ---------------------------------------------------------------------------
// Decision-variable plumbing
// ---------------------------------------------------------------------------

namespace detail {

struct VarLayout {
    std::vector<std::pair<std::size_t, std::size_t>> vars; // (component, node)

    static VarLayout for_problem(const Problem& p) {
        VarLayout lay;
        const std::size_t n = p.grid->n;
        const std::size_t cut = p.cut_node();
        for (std::size_t c = 0; c < p.m(); ++c) {
            for (std::size_t k = 0; k <= n; ++k) {
                const bool fixed =
                    (k == cut && p.bc_left.has_value()) || (k == n && p.bc_right.has_value());
                if (!fixed) lay.vars.emplace_back(c, k);
            }
        }
        return lay;
    }

    void scatter(std::span<const double> v, SampledFunction& x) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            x.at(vars[i].first, vars[i].second) = v[i];
    }
    void gather(const SampledFunction& x, std::vector<double>& v) const {
        v.resize(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i)
            v[i] = x.at(vars[i].first, vars[i].second);
    }
};

// default initial trajectory: straight line in s between fixed boundary
// values; a constant when one endpoint is free; zero when both are
inline SampledFunction default_init(const Problem& p) {
    const Grid& g = *p.grid;
    SampledFunction x(p.grid, p.m());
    const std::size_t cut = p.cut_node();
    const double s0 = g.s_nodes[cut], s1 = g.s_nodes[g.n];
    for (std::size_t c = 0; c < p.m(); ++c) {
        const double xl = p.bc_left ? (*p.bc_left)[c] : 0.0;
        const double xr = p.bc_right ? (*p.bc_right)[c] : 0.0;
        for (std::size_t k = 0; k <= g.n; ++k) {
            double v = 0.0;
            if (p.bc_left && p.bc_right)
                v = xl + (xr - xl) * (g.s_nodes[k] - s0) / (s1 - s0);
            else if (p.bc_left)
                v = xl;
            else if (p.bc_right)
                v = xr;
            x.at(c, k) = v;
        }
    }
    return x;
}

inline void apply_bcs(const Problem& p, SampledFunction& x) {
    const std::size_t cut = p.cut_node();
    for (std::size_t c = 0; c < p.m(); ++c) {
        if (p.bc_left) x.at(c, cut) = (*p.bc_left)[c];
        if (p.bc_right) x.at(c, p.grid->n) = (*p.bc_right)[c];
    }
}

} // namespace detail

// Discrete objective over the solver's decision variables, shared between
// the solvers and brute-force cross-checks in the tests.
struct ObjectiveHandle {
    std::vector<std::pair<std::size_t, std::size_t>> vars;
    std::vector<double> init;
    // value(v); value_and_grad returns J and fills grad
    std::function<double(std::span<const double>)> value;
    std::function<double(std::span<const double>, std::span<double>)> value_and_grad;
    std::function<SampledFunction(std::span<const double>)> assemble;
    bool cheap_gradient = true; // analytic gradient available
};

namespace detail {

// J(x) = sum_k w_k L(t_k, x_k, (D x)_k); grad_(i,j) J = w_j dL/dx_i(j)
// + sum_k w_k dL/dd_i(k) D(k,j). D is linear, so the gradient is exact.
struct RitzState {
    const Problem* p;
    LagrangianEval ev;
    OperatorMatrix D;
    std::vector<double> w; // cost weights (masked left of the cut)
    VarLayout layout;
    SampledFunction x;
    SampledFunction d;
    std::vector<double> Lv, u;
    std::vector<std::vector<double>> px, pd; // partials per component

    explicit RitzState(const Problem& prob)
        : p(&prob),
          ev(make_eval(prob.lagrangian)),
          D(assemble_matrix(OpKind::LeftDeriv, prob.params, prob.grid)),
          w(cost_weights(*prob.grid, prob.cut_node())),
          layout(VarLayout::for_problem(prob)),
          x(prob.grid, prob.m()),
          d(prob.grid, prob.m()) {
        apply_bcs(prob, x);
        const std::size_t nn = prob.grid->n + 1;
        Lv.resize(nn);
        u.resize(nn);
        px.assign(prob.m(), std::vector<double>(nn));
        pd.assign(prob.m(), std::vector<double>(nn));
    }

    void forward(std::span<const double> v, bool need_partials) {
        layout.scatter(v, x);
        const Grid& g = *p->grid;
        for (std::size_t c = 0; c < p->m(); ++c)
            D.apply(x.comp(c), d.comp(c));
        SlotBuffer slots(p->m(), false);
        for (std::size_t k = 0; k <= g.n; ++k) {
            slots.set(g.nodes[k], x, d, {}, k);
            Lv[k] = run_at_node(ev.L, slots.s, k);
            if (need_partials) {
                for (std::size_t c = 0; c < p->m(); ++c) {
                    px[c][k] = run_at_node(ev.dLdx[c], slots.s, k);
                    pd[c][k] = run_at_node(ev.dLdd[c], slots.s, k);
                }
            }
        }
    }

    double objective() const { return weighted_sum(w, Lv); }

    void gradient(std::span<double> grad) {
        const Grid& g = *p->grid;
        const std::size_t n = g.n;
        // full-node gradient per component, then gather the decision vars
        std::vector<std::vector<double>> gn(p->m(), std::vector<double>(n + 1, 0.0));
        for (std::size_t c = 0; c < p->m(); ++c) {
            for (std::size_t k = 0; k <= n; ++k) u[k] = w[k] * pd[c][k];
            // D^T u, lower-triangular D
            for (std::size_t j = 0; j <= n; ++j) {
                double acc = w[j] * px[c][j];
                for (std::size_t k = j; k <= n; ++k)
                    acc += D.weights[k * (n + 1) + j] * u[k];
                gn[c][j] = acc;
            }
        }
        for (std::size_t i = 0; i < layout.vars.size(); ++i)
            grad[i] = gn[layout.vars[i].first][layout.vars[i].second];
    }
};

} // namespace detail

inline ObjectiveHandle make_plain_objective(const Problem& p) {
    if (!std::holds_alternative<PlainKind>(p.kind) &&
        !std::holds_alternative<SplitDomainKind>(p.kind))
        throw KindError("plain objective requires a Plain or SplitDomain problem");
    auto st = std::make_shared<detail::RitzState>(p);
    ObjectiveHandle h;
    h.vars = st->layout.vars;
    SampledFunction x0 = detail::default_init(p);
    st->layout.gather(x0, h.init);
    h.value = [st](std::span<const double> v) {
        st->forward(v, false);
        return st->objective();
    };
    h.value_and_grad = [st](std::span<const double> v, std::span<double> grad) {
        st->forward(v, true);
        st->gradient(grad);
        return st->objective();
    };
    h.assemble = [st](std::span<const double> v) {
        st->layout.scatter(v, st->x);
        return st->x;
    };
    return h;
}

// ---------------------------------------------------------------------------
// Nonlinear conjugate gradient (Polak-Ribiere+) with Armijo backtracking.
// The initial step comes from the directional curvature (one extra gradient
// when gradients are cheap), which makes the search exact on quadratics.
// ---------------------------------------------------------------------------

namespace detail {

struct OptOutcome {
    std::size_t iterations = 0;
    double grad_norm = 0;
    bool converged = false;
    std::vector<double> trace;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline OptOutcome nlcg_minimize(std::vector<double>& v, const ObjectiveHandle& h,
                                const SolverConfig& cfg) {
    const std::size_t nv = v.size();
    OptOutcome out;
    if (nv == 0) {
        out.converged = true;
        out.trace.push_back(h.value(v));
        return out;
    }

    std::vector<double> g(nv), g_new(nv), pdir(nv), trial(nv), g_probe(nv);
    double J = h.value_and_grad(v, g);
    out.trace.push_back(J);
    for (std::size_t i = 0; i < nv; ++i) pdir[i] = -g[i];

    double alpha_prev = 0.0;
    const double c1 = 1e-4;
    std::size_t it = 0;
    for (; it < cfg.max_iters; ++it) {
        const double gnorm = std::sqrt(dot(g, g));
        out.grad_norm = gnorm;
        if (gnorm <= cfg.grad_tol) {
            out.converged = true;
            break;
        }

        double d0 = dot(g, pdir);
        if (!(d0 < 0.0)) { // not a descent direction; restart
            for (std::size_t i = 0; i < nv; ++i) pdir[i] = -g[i];
            d0 = -gnorm * gnorm;
        }

        // initial step
        double alpha;
        const double pnorm = std::sqrt(dot(pdir, pdir));
        if (h.cheap_gradient) {
            const double eps = 1e-5 * (1.0 + std::sqrt(dot(v, v))) / std::max(pnorm, 1e-30);
            for (std::size_t i = 0; i < nv; ++i) trial[i] = v[i] + eps * pdir[i];
            h.value_and_grad(trial, g_probe);
            const double curv = (dot(g_probe, pdir) - d0) / eps;
            alpha = curv > 1e-30 ? -d0 / curv
                                 : (alpha_prev > 0.0 ? alpha_prev : 1.0 / std::max(gnorm, 1.0));
        } else {
            alpha = alpha_prev > 0.0 ? alpha_prev : 1.0 / std::max(gnorm, 1.0);
        }

        // Armijo backtracking with quadratic interpolation
        bool accepted = false;
        double J_new = J;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < nv; ++i) trial[i] = v[i] + alpha * pdir[i];
            const double Jt = h.value(trial);
            if (Jt <= J + c1 * alpha * d0) {
                accepted = true;
                J_new = Jt;
                break;
            }
            const double denom = 2.0 * (Jt - J - d0 * alpha);
            double a2 = denom > 0.0 ? -d0 * alpha * alpha / denom : 0.5 * alpha;
            if (!(a2 > 0.0522 * alpha) || !(a2 < 0.95 * alpha)) a2 = 0.5 * alpha;
            alpha = a2;
            if (alpha * pnorm < 1e-16 * (1.0 + std::sqrt(dot(v, v)))) break;
        }
        if (!accepted) break; // roundoff floor; report whatever gnorm we have

        std::swap(v, trial); // v now holds the accepted point
        h.value_and_grad(v, g_new);
        J = J_new;
        out.trace.push_back(J);
        alpha_prev = alpha;

        // PR+ update with automatic restart
        double beta = 0.0;
        const double gg = dot(g, g);
        if (gg > 0.0) {
            double num = 0.0;
            for (std::size_t i = 0; i < nv; ++i) num += g_new[i] * (g_new[i] - g[i]);
            beta = std::max(0.0, num / gg);
        }
        for (std::size_t i = 0; i < nv; ++i) pdir[i] = -g_new[i] + beta * pdir[i];
        std::swap(g, g_new);
    }
    out.iterations = it;
    if (!out.converged) {
        const double gnorm = std::sqrt(dot(g, g));
        out.grad_norm = gnorm;
        out.converged = gnorm <= cfg.grad_tol;
    }
    return out;
}

inline void fill_common(SolveReport& r, const detail::OptOutcome& o) {
    r.iterations = o.iterations;
    r.converged = o.converged;
    r.gradient_norm = o.grad_norm;
    r.objective_trace = o.trace;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Plain / split-domain solve
// ---------------------------------------------------------------------------

inline SolveReport solve_plain(const Problem& p, const SolverConfig& cfg,
                               const std::optional<SampledFunction>& x0 = {}) {
    cfg.validate();
    ObjectiveHandle h = make_plain_objective(p);
    std::vector<double> v = h.init;
    if (x0) {
        if (x0->grid->n != p.grid->n || x0->components != p.m())
            throw DomainError("solve_plain: initial guess does not match the problem");
        SampledFunction xi = *x0;
        detail::apply_bcs(p, xi);
        detail::VarLayout::for_problem(p).gather(xi, v);
    }
    detail::OptOutcome o = detail::nlcg_minimize(v, h, cfg);

    SolveReport r;
    r.x = h.assemble(v);
    detail::fill_common(r, o);
    r.diagnostics = compute_diagnostics(r.x, p);
    r.sufficiency = r.converged && convexity_sampled(p.lagrangian, r.x, p.params);
    return r;
}

// ---------------------------------------------------------------------------
// Isoperimetric solve: scalar multiplier secant on the constraint defect,
// inner plain solves on K = L + lambda g.
// ---------------------------------------------------------------------------

namespace detail {

inline Problem augmented_problem(const Problem& p, const IsoperimetricKind& iso) {
    if (p.lagrangian.params.count("_lam") || iso.g.params.count("_lam"))
        throw DomainError("parameter name '_lam' is reserved");
    Lagrangian K = p.lagrangian;
    K.expr = ex::add(p.lagrangian.expr,
                     ex::mul(ex::var("_lam"), substitute(iso.g.expr, iso.g.params)));
    for (const auto& [k, val] : iso.g.params) K.params.emplace(k, val);
    K.params["_lam"] = 0.0;
    return make_problem(std::move(K), p.params, p.grid, p.bc_left, p.bc_right, PlainKind{});
}

inline double integral_value(const SampledFunction& x, const Problem& p,
                             const IsoperimetricKind& iso) {
    LagrangianEval gev = make_eval(iso.g);
    TrajectoryData td{trajectory_deriv(x, p.params), {}};
    SampledFunction gv = eval_along(gev.L, x, td, gev);
    return quad_trapezoid(gv.comp(0), *x.grid);
}

} // namespace detail

inline SolveReport solve_isoperimetric(const Problem& p, const SolverConfig& cfg) {
    cfg.validate();
    auto* iso = std::get_if<IsoperimetricKind>(&p.kind);
    if (!iso) throw KindError("solve_isoperimetric requires an isoperimetric problem");

    Problem aug = detail::augmented_problem(p, *iso);
    std::optional<SampledFunction> warm;
    detail::OptOutcome last_outcome;
    SampledFunction x;

    auto solve_at = [&](double lam) {
        aug.lagrangian.params["_lam"] = lam;
        SolveReport inner = solve_plain(aug, cfg, warm);
        warm = inner.x;
        x = inner.x;
        last_outcome.iterations += inner.iterations;
        last_outcome.converged = inner.converged;
        last_outcome.grad_norm = inner.gradient_norm;
        last_outcome.trace = inner.objective_trace;
        return detail::integral_value(x, p, *iso) - iso->l;
    };

    auto abnormal_check = [&]() {
        // extremal of I? residual of the constraint functional at the iterate
        Problem ip = make_problem(iso->g, p.params, p.grid, p.bc_left, p.bc_right, PlainKind{});
        SampledFunction res = el_residual(x, ip);
        std::vector<double> sq(x.grid->n + 1);
        for (std::size_t k = 0; k <= x.grid->n; ++k)
            sq[k] = res.values[k] * res.values[k];
        const double norm = std::sqrt(quad_trapezoid(sq, *x.grid));
        if (norm <= 1e-6)
            throw AbnormalCase(
                "isoperimetric iterate is an extremal of the constraint functional; "
                "the normal multiplier rule does not apply");
    };

    double lam0 = 0.0, d0 = solve_at(lam0);
    double lam_star = lam0;
    if (std::abs(d0) > cfg.constraint_tol) {
        double lam1 = 1.0, d1 = solve_at(lam1);
        bool solved = false;
        for (int it = 0; it < 80; ++it) {
            if (std::abs(d1) <= cfg.constraint_tol) {
                solved = true;
                lam_star = lam1;
                break;
            }
            if (std::abs(d1 - d0) <= 1e-14 * (1.0 + std::abs(d1))) {
                // flat defect: either abnormal or hunt a bracket by expansion
                abnormal_check();
                lam0 = lam1;
                d0 = d1;
                lam1 = (lam1 == 0.0 ? 1.0 : lam1) * cfg.penalty_growth;
                d1 = solve_at(lam1);
                continue;
            }
            const double lam2 = lam1 - d1 * (lam1 - lam0) / (d1 - d0);
            lam0 = lam1;
            d0 = d1;
            lam1 = lam2;
            d1 = solve_at(lam1);
            if (!(std::abs(lam1) < 1e8)) break;
        }
        if (!solved && std::abs(d1) > cfg.constraint_tol) abnormal_check();
        lam_star = lam1;
    }

    SolveReport r;
    r.x = x;
    detail::fill_common(r, last_outcome);
    r.multiplier = lam_star;
    r.diagnostics = compute_diagnostics(r.x, p);
    r.converged = last_outcome.converged &&
                  r.diagnostics.constraint_defect <= cfg.constraint_tol;

    // certificate for the augmented Lagrangian K = L + lambda g
    aug.lagrangian.params["_lam"] = lam_star;
    SampledFunction kres = el_residual(r.x, aug);
    std::vector<double> sq(r.x.grid->n + 1);
    for (std::size_t k = 0; k <= r.x.grid->n; ++k)
        sq[k] = kres.values[k] * kres.values[k];
    r.k_residual_norm = std::sqrt(quad_trapezoid(sq, *r.x.grid));

    const bool Lconv = convexity_sampled(p.lagrangian, r.x, p.params);
    const bool gconv = convexity_sampled(iso->g, r.x, p.params);
    const bool gconc = convexity_sampled(iso->g, r.x, p.params, /*negate=*/true);
    r.sufficiency = r.converged && Lconv &&
                    ((lam_star >= 0.0 && gconv) || (lam_star <= 0.0 && gconc));
    return r;
}

// ---------------------------------------------------------------------------
// Holonomic solve: eliminate x2 through g(t, x1, x2) = 0 with a safeguarded
// per-node root-find; minimize over interior x1 values only.
// ---------------------------------------------------------------------------

namespace detail {

struct Elimination {
    Program g, g2, g3; // g and its x1/x2 partials over slots {t, x1, x2}
    std::vector<double> x2_warm;

    Elimination(const ExprPtr& gexpr, const std::map<std::string, double>& params,
                std::size_t nn)
        : x2_warm(nn, 0.0) {
        const ExprPtr gb = substitute(gexpr, params);
        const std::vector<std::string> slots{"t", "x1", "x2"};
        g = compile(gb, slots);
        g2 = compile(diff(gb, "x1"), slots);
        g3 = compile(diff(gb, "x2"), slots);
    }

    double solve_node(std::size_t k, double t, double x1) {
        std::vector<double> s{t, x1, x2_warm[k]};
        auto gv = [&](double x2) {
            s[2] = x2;
            return run_at_node(g, s, k);
        };
        auto gd = [&](double x2) {
            s[2] = x2;
            return run_at_node(g3, s, k);
        };
        double x2 = x2_warm[k];
        const double ftol = 1e-13;
        // Newton with derivative safeguard
        for (int it = 0; it < 50; ++it) {
            const double f = gv(x2);
            if (std::abs(f) <= ftol * (1.0 + std::abs(x2))) {
                if (std::abs(gd(x2)) < 1e-10) throw SingularConstraint(k);
                x2_warm[k] = x2;
                return x2;
            }
            const double der = gd(x2);
            if (std::abs(der) < 1e-12) break;
            const double step = f / der;
            if (!std::isfinite(step) || std::abs(step) > 1e6) break;
            x2 -= step;
            if (!std::isfinite(x2)) break;
        }
        // bracket expansion + bisection fallback
        double lo = x2_warm[k], hi = lo;
        double flo = gv(lo), fhi = flo;
        double span = std::max(1e-3, 1e-3 * std::abs(lo));
        bool bracketed = false;
        for (int it = 0; it < 60; ++it) {
            lo -= span;
            hi += span;
            span *= 2.0;
            flo = gv(lo);
            fhi = gv(hi);
            if ((flo <= 0.0 && fhi >= 0.0) || (flo >= 0.0 && fhi <= 0.0)) {
                bracketed = true;
                break;
            }
        }
        if (!bracketed) throw RootFindFailure(k);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = gv(mid);
            if (std::abs(fm) <= ftol * (1.0 + std::abs(mid)) || hi - lo < 1e-15 * (1.0 + std::abs(mid))) {
                if (std::abs(gd(mid)) < 1e-10) throw SingularConstraint(k);
                x2_warm[k] = mid;
                return mid;
            }
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        if (std::abs(gd(0.5 * (lo + hi))) < 1e-10) throw SingularConstraint(k);
        x2_warm[k] = 0.5 * (lo + hi);
        return x2_warm[k];
    }

    // dx2/dx1 = -g2/g3 at the eliminated point
    double sensitivity(std::size_t k, double t, double x1, double x2) {
        std::vector<double> s{t, x1, x2};
        const double den = run_at_node(g3, s, k);
        if (std::abs(den) < 1e-10) throw SingularConstraint(k);
        return -run_at_node(g2, s, k) / den;
    }
};

} // namespace detail

inline ObjectiveHandle make_holonomic_objective(const Problem& p) {
    auto* holo = std::get_if<HolonomicKind>(&p.kind);
    if (!holo) throw KindError("holonomic objective requires a holonomic problem");
    if (!p.bc_left || !p.bc_right)
        throw DomainError("holonomic solve requires fixed boundary conditions");

    struct State {
        const Problem* p;
        detail::LagrangianEval ev;
        OperatorMatrix D;
        std::vector<double> w;
        detail::Elimination elim;
        SampledFunction x, d;
        std::vector<double> Lv;
        std::vector<std::vector<double>> px, pd;
        std::vector<double> sens;

        State(const Problem& prob, const HolonomicKind& holo)
            : p(&prob),
              ev(detail::make_eval(prob.lagrangian)),
              D(assemble_matrix(OpKind::LeftDeriv, prob.params, prob.grid)),
              w(detail::cost_weights(*prob.grid, 0)),
              elim(holo.g, prob.lagrangian.params, prob.grid->n + 1),
              x(prob.grid, 2),
              d(prob.grid, 2) {
            const std::size_t nn = prob.grid->n + 1;
            Lv.resize(nn);
            px.assign(2, std::vector<double>(nn));
            pd.assign(2, std::vector<double>(nn));
            sens.resize(nn);
        }

        void forward(std::span<const double> v, bool need_partials) {
            const Grid& g = *p->grid;
            for (std::size_t k = 1; k < g.n; ++k) x.at(0, k) = v[k - 1];
            // endpoints of x2 stay at the boundary data; interior is eliminated
            for (std::size_t k = 1; k < g.n; ++k)
                x.at(1, k) = elim.solve_node(k, g.nodes[k], x.at(0, k));
            D.apply(x.comp(0), d.comp(0));
            D.apply(x.comp(1), d.comp(1));
            detail::SlotBuffer slots(2, false);
            for (std::size_t k = 0; k <= g.n; ++k) {
                slots.set(g.nodes[k], x, d, {}, k);
                Lv[k] = detail::run_at_node(ev.L, slots.s, k);
                if (need_partials) {
                    for (std::size_t c = 0; c < 2; ++c) {
                        px[c][k] = detail::run_at_node(ev.dLdx[c], slots.s, k);
                        pd[c][k] = detail::run_at_node(ev.dLdd[c], slots.s, k);
                    }
                    if (k > 0 && k < g.n)
                        sens[k] = elim.sensitivity(k, g.nodes[k], x.at(0, k), x.at(1, k));
                }
            }
        }

        void gradient(std::span<double> grad) {
            const Grid& g = *p->grid;
            const std::size_t n = g.n;
            std::vector<double> u1(n + 1), u2(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                u1[k] = w[k] * pd[0][k];
                u2[k] = w[k] * pd[1][k];
            }
            for (std::size_t j = 1; j < n; ++j) {
                double acc = w[j] * (px[0][j] + px[1][j] * sens[j]);
                double a1 = 0.0, a2 = 0.0;
                for (std::size_t k = j; k <= n; ++k) {
                    a1 += D.weights[k * (n + 1) + j] * u1[k];
                    a2 += D.weights[k * (n + 1) + j] * u2[k];
                }
                grad[j - 1] = acc + a1 + a2 * sens[j];
            }
        }
    };

    // endpoint values of x2 must satisfy the surface equation
    {
        const Grid& g = *p.grid;
        const ExprPtr gb = substitute(holo->g, p.lagrangian.params);
        Program gp = compile(gb, {"t", "x1", "x2"});
        const std::vector<double> sa{g.nodes[0], (*p.bc_left)[0], (*p.bc_left)[1]};
        const std::vector<double> sb{g.nodes[g.n], (*p.bc_right)[0], (*p.bc_right)[1]};
        const double ga = gp.run(sa), gbv = gp.run(sb);
        if (std::abs(ga) > 1e-8 * (1.0 + std::abs((*p.bc_left)[1])) ||
            std::abs(gbv) > 1e-8 * (1.0 + std::abs((*p.bc_right)[1])))
            throw DomainError("holonomic boundary values do not satisfy g = 0");
    }

    auto st = std::make_shared<State>(p, *holo);
    detail::apply_bcs(p, st->x);
    // warm-start the per-node elimination from the s-line between endpoints
    {
        SampledFunction x0 = detail::default_init(p);
        for (std::size_t k = 0; k <= p.grid->n; ++k) st->elim.x2_warm[k] = x0.at(1, k);
    }

    ObjectiveHandle h;
    for (std::size_t k = 1; k < p.grid->n; ++k) h.vars.emplace_back(0, k);
    {
        SampledFunction x0 = detail::default_init(p);
        for (std::size_t k = 1; k < p.grid->n; ++k) h.init.push_back(x0.at(0, k));
    }
    h.value = [st](std::span<const double> v) {
        st->forward(v, false);
        return detail::weighted_sum(st->w, st->Lv);
    };
    h.value_and_grad = [st](std::span<const double> v, std::span<double> grad) {
        st->forward(v, true);
        st->gradient(grad);
        return detail::weighted_sum(st->w, st->Lv);
    };
    h.assemble = [st](std::span<const double> v) {
        st->forward(v, false);
        return st->x;
    };
    return h;
}

inline SolveReport solve_holonomic(const Problem& p, const SolverConfig& cfg) {
    cfg.validate();
    ObjectiveHandle h = make_holonomic_objective(p);
    std::vector<double> v = h.init;
    detail::OptOutcome o = detail::nlcg_minimize(v, h, cfg);

    SolveReport r;
    r.x = h.assemble(v);
    detail::fill_common(r, o);
    r.diagnostics = compute_diagnostics(r.x, p);
    r.multiplier_fn = holonomic_multiplier(r.x, p);
    r.converged = o.converged && r.diagnostics.constraint_defect <= cfg.constraint_tol;
    r.sufficiency = r.converged && convexity_sampled(p.lagrangian, r.x, p.params);
    return r;
}

// ---------------------------------------------------------------------------
// Herglotz solve: minimize z(b) with central finite-difference gradients
// (the objective flows through an ODE solve, so no analytic path exists).
// ---------------------------------------------------------------------------

inline ObjectiveHandle make_herglotz_objective(const Problem& p, const SolverConfig& cfg) {
    auto* hz = std::get_if<HerglotzKind>(&p.kind);
    if (!hz) throw KindError("herglotz objective requires a Herglotz problem");

    struct State {
        const Problem* p;
        double z_a;
        detail::LagrangianEval ev;
        OperatorMatrix D;
        SampledFunction x, d;
        double fd;

        State(const Problem& prob, double za, double fd_step)
            : p(&prob),
              z_a(za),
              ev(detail::make_eval(prob.lagrangian)),
              D(assemble_matrix(OpKind::LeftDeriv, prob.params, prob.grid)),
              x(prob.grid, 1),
              d(prob.grid, 1),
              fd(fd_step) {}

        double zb() {
            std::vector<double> z = detail::integrate_herglotz(ev, x, d, z_a);
            return z.back();
        }

        double eval_vars(std::span<const double> v) {
            const std::size_t n = p->grid->n;
            for (std::size_t k = 1; k < n; ++k) x.values[k] = v[k - 1];
            D.apply(x.comp(0), d.comp(0));
            return zb();
        }
    };

    auto st = std::make_shared<State>(p, hz->z_a, cfg.fd_step);
    detail::apply_bcs(p, st->x);

    ObjectiveHandle h;
    h.cheap_gradient = false;
    const std::size_t n = p.grid->n;
    for (std::size_t k = 1; k < n; ++k) h.vars.emplace_back(0, k);
    {
        SampledFunction x0 = detail::default_init(p);
        for (std::size_t k = 1; k < n; ++k) h.init.push_back(x0.values[k]);
    }
    h.value = [st](std::span<const double> v) { return st->eval_vars(v); };
    h.value_and_grad = [st, n](std::span<const double> v, std::span<double> grad) {
        const double J = st->eval_vars(v);
        const std::size_t dim = n + 1;
        std::vector<double> dbase = st->d.values;
        for (std::size_t j = 0; j < v.size(); ++j) {
            const std::size_t node = j + 1;
            const double fd = st->fd;
            double zp, zm;
            st->x.values[node] = v[j] + fd;
            for (std::size_t k = 0; k < dim; ++k)
                st->d.values[k] = dbase[k] + fd * st->D.weights[k * dim + node];
            zp = st->zb();
            st->x.values[node] = v[j] - fd;
            for (std::size_t k = 0; k < dim; ++k)
                st->d.values[k] = dbase[k] - fd * st->D.weights[k * dim + node];
            zm = st->zb();
            st->x.values[node] = v[j];
            grad[j] = (zp - zm) / (2.0 * fd);
        }
        st->d.values = dbase;
        return J;
    };
    h.assemble = [st](std::span<const double> v) {
        const std::size_t nn = st->p->grid->n;
        for (std::size_t k = 1; k < nn; ++k) st->x.values[k] = v[k - 1];
        return st->x;
    };
    return h;
}

inline SolveReport solve_herglotz(const Problem& p, const SolverConfig& cfg) {
    cfg.validate();
    ObjectiveHandle h = make_herglotz_objective(p, cfg);
    std::vector<double> v = h.init;
    detail::OptOutcome o = detail::nlcg_minimize(v, h, cfg);

    SolveReport r;
    r.x = h.assemble(v);
    detail::fill_common(r, o);
    r.diagnostics = compute_diagnostics(r.x, p);
    r.z_b = herglotz_state(r.x, p).back();
    r.converged = o.converged;
    return r;
}

// ---------------------------------------------------------------------------
// Joint (x, rho) minimization: coarse pre-scan, golden-section refinement,
// and the stationarity integral int dL/dd * dpsi/drho dt at the optimum.
// ---------------------------------------------------------------------------

namespace detail {

inline Problem problem_at_rho(const Problem& p, double rho) {
    GridPtr g = make_grid(p.grid->a, p.grid->b, p.grid->n, rho, Spacing::UniformInS);
    return make_problem(p.lagrangian, FracParams(p.params.alpha, rho), g, p.bc_left,
                        p.bc_right, PlainKind{});
}

} // namespace detail

inline SolveReport optimize_rho(const Problem& p, std::pair<double, double> rho_range,
                                const SolverConfig& cfg) {
    cfg.validate();
    if (!std::holds_alternative<PlainKind>(p.kind))
        throw KindError("optimize_rho requires a Plain problem");
    if (p.m() != 1) throw KindError("optimize_rho supports a single dependent variable");
    if (!(rho_range.first > 0.0) || !(rho_range.second > rho_range.first) ||
        !std::isfinite(rho_range.second))
        throw DomainError("optimize_rho: invalid rho range");

    std::size_t solves = 0;
    double best_rho = rho_range.first;
    double best_J = std::numeric_limits<double>::infinity();
    std::optional<SolveReport> best;

    auto eval_rho = [&](double rho) {
        Problem pr = detail::problem_at_rho(p, rho);
        SolveReport rep = solve_plain(pr, cfg);
        ++solves;
        const double J = rep.diagnostics.J_value;
        if (J < best_J) {
            best_J = J;
            best_rho = rho;
            best = std::move(rep);
        }
        return J;
    };

    // coarse pre-scan (unimodality is assumed only locally)
    constexpr int scan_points = 8;
    double scanJ[scan_points];
    double scanR[scan_points];
    for (int i = 0; i < scan_points; ++i) {
        scanR[i] = rho_range.first +
                   (rho_range.second - rho_range.first) * i / (scan_points - 1.0);
        scanJ[i] = eval_rho(scanR[i]);
    }
    int ibest = 0;
    double jmin = scanJ[0], jmax = scanJ[0];
    for (int i = 1; i < scan_points; ++i) {
        if (scanJ[i] < scanJ[ibest]) ibest = i;
        jmin = std::min(jmin, scanJ[i]);
        jmax = std::max(jmax, scanJ[i]);
    }

    SolveReport r;
    if (jmax - jmin <= 1e-12 * (1.0 + std::abs(jmin))) {
        // flat objective; any rho does
        r = *best;
        r.flat_objective = true;
        r.rho_opt = best_rho;
        r.iterations = solves;
        r.stationarity_integral = 0.0;
        return r;
    }

    double lo = scanR[std::max(0, ibest - 1)];
    double hi = scanR[std::min(scan_points - 1, ibest + 1)];
    constexpr double invphi = 0.6180339887498949;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = eval_rho(x1);
    double f2 = eval_rho(x2);
    for (int it = 0; it < 200 && (hi - lo) > 1e-4; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = eval_rho(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = eval_rho(x2);
        }
    }

    r = *best;
    r.rho_opt = best_rho;
    r.iterations = solves;
    r.boundary_optimum =
        (best_rho - rho_range.first) <= 1e-3 * (rho_range.second - rho_range.first) ||
        (rho_range.second - best_rho) <= 1e-3 * (rho_range.second - rho_range.first);

    // stationarity integral at rho*: dpsi/drho of cD x at fixed x and fixed
    // t-nodes, via the non-uniform product-integration form on sigma = t^rho
    {
        const Grid& g = *r.x.grid;
        const double rs = best_rho;
        const double delta = 1e-4 * rs;
        std::vector<double> sig_p(g.n + 1), sig_m(g.n + 1);
        for (std::size_t k = 0; k <= g.n; ++k) {
            sig_p[k] = pow_rho(g.nodes[k], rs + delta);
            sig_m[k] = pow_rho(g.nodes[k], rs - delta);
        }
        std::vector<double> dp = fracvar::detail::left_deriv_nonuniform(
            r.x.comp(0), sig_p, p.params.alpha, rs + delta);
        std::vector<double> dm = fracvar::detail::left_deriv_nonuniform(
            r.x.comp(0), sig_m, p.params.alpha, rs - delta);
        std::vector<double> psi_prime(g.n + 1);
        for (std::size_t k = 0; k <= g.n; ++k)
            psi_prime[k] = (dp[k] - dm[k]) / (2.0 * delta);

        Problem pr = detail::problem_at_rho(p, rs);
        detail::LagrangianEval ev = detail::make_eval(pr.lagrangian);
        detail::TrajectoryData td{trajectory_deriv(r.x, pr.params), {}};
        SampledFunction p3 = detail::eval_along(ev.dLdd[0], r.x, td, ev);
        std::vector<double> integrand(g.n + 1);
        for (std::size_t k = 0; k <= g.n; ++k)
            integrand[k] = p3.values[k] * psi_prime[k];
        r.stationarity_integral = quad_trapezoid(integrand, g);
    }
    return r;
}

} // namespace fracvar
