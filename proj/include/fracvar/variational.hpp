#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/expr.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/grid.hpp"
#include "fracvar/problem.hpp"

// Necessary/sufficient-condition instrumentation: the functional J, the
// Euler-Lagrange residual, transversality values, the Legendre margin, the
// integration-by-parts defect and constraint defects.
//
// Partial derivative sampling is discretize-then-differentiate: dL/dd_i is
// evaluated nodewise into a SampledFunction first, then the discrete right
// derivative is applied to it.

namespace fracvar {

namespace detail {

// Compiled Lagrangian partials over the slot layout [t, x1..xm, d1..dm, z?].
struct LagrangianEval {
    std::size_t m = 1;
    bool has_z = false;
    Program L;
    std::vector<Program> dLdx;   // d/dx_i
    std::vector<Program> dLdd;   // d/dd_i
    std::vector<Program> d2Ldd;  // d^2/dd_i^2 (Legendre diagonal)
    Program dLdz;                // zero program when !has_z
};

inline LagrangianEval make_eval(const Lagrangian& lag) {
    LagrangianEval ev;
    ev.m = lag.m;
    ev.has_z = lag.has_z;
    const auto slots = lag.slot_names();
    const ExprPtr bound = lag.bound_expr();
    ev.L = compile(bound, slots);
    for (std::size_t i = 1; i <= lag.m; ++i) {
        const std::string xi = "x" + std::to_string(i);
        const std::string di = "d" + std::to_string(i);
        ev.dLdx.push_back(compile(diff(bound, xi), slots));
        const ExprPtr dd = diff(bound, di);
        ev.dLdd.push_back(compile(dd, slots));
        ev.d2Ldd.push_back(compile(diff(dd, di), slots));
    }
    ev.dLdz = compile(lag.has_z ? diff(bound, "z") : ex::constant(0.0), slots);
    return ev;
}

// Slot buffer for one node: [t, x.., d.., z?]
struct SlotBuffer {
    std::vector<double> s;
    std::size_t m;
    bool has_z;

    SlotBuffer(std::size_t m_, bool has_z_)
        : s(1 + 2 * m_ + (has_z_ ? 1 : 0), 0.0), m(m_), has_z(has_z_) {}

    void set(double t, const SampledFunction& x, const SampledFunction& d,
             std::span<const double> z, std::size_t k) {
        s[0] = t;
        for (std::size_t i = 0; i < m; ++i) {
            s[1 + i] = x.at(i, k);
            s[1 + m + i] = d.at(i, k);
        }
        if (has_z) s[1 + 2 * m] = z.empty() ? 0.0 : z[k];
    }
};

inline double run_at_node(const Program& prog, std::span<const double> slots,
                          std::size_t node) {
    try {
        return prog.run(slots);
    } catch (const EvalError& e) {
        throw EvalError(e.kind, e.what(), node);
    }
}

} // namespace detail

// cD x for every component.
inline SampledFunction trajectory_deriv(const SampledFunction& x, const FracParams& p) {
    SampledFunction d(x.grid, x.components);
    for (std::size_t c = 0; c < x.components; ++c) {
        SampledFunction xc(x.grid, 1);
        std::copy(x.comp(c).begin(), x.comp(c).end(), xc.comp(0).begin());
        SampledFunction dc = ck_deriv(xc, p);
        std::copy(dc.comp(0).begin(), dc.comp(0).end(), d.comp(c).begin());
    }
    return d;
}

namespace detail {

// z' = L(t, x, cD x, z), z(a) = z_a, integrated by classical RK4 with x and
// cD x interpolated linearly between nodes for the half-step stages.
inline std::vector<double> integrate_herglotz(const LagrangianEval& ev,
                                              const SampledFunction& x,
                                              const SampledFunction& d, double z_a) {
    const Grid& g = *x.grid;
    std::vector<double> z(g.n + 1, 0.0);
    z[0] = z_a;
    SlotBuffer slots(ev.m, true);
    const std::size_t m = ev.m;
    auto fill_mid = [&](std::size_t k) {
        slots.s[0] = 0.5 * (g.nodes[k] + g.nodes[k + 1]);
        for (std::size_t i = 0; i < m; ++i) {
            slots.s[1 + i] = 0.5 * (x.at(i, k) + x.at(i, k + 1));
            slots.s[1 + m + i] = 0.5 * (d.at(i, k) + d.at(i, k + 1));
        }
    };
    for (std::size_t k = 0; k < g.n; ++k) {
        const double h = g.nodes[k + 1] - g.nodes[k];
        slots.set(g.nodes[k], x, d, z, k);
        const double k1 = run_at_node(ev.L, slots.s, k);
        fill_mid(k);
        slots.s[1 + 2 * m] = z[k] + 0.5 * h * k1;
        const double k2 = run_at_node(ev.L, slots.s, k);
        slots.s[1 + 2 * m] = z[k] + 0.5 * h * k2;
        const double k3 = run_at_node(ev.L, slots.s, k);
        slots.set(g.nodes[k + 1], x, d, z, k); // z slot overwritten next
        slots.s[1 + 2 * m] = z[k] + h * k3;
        const double k4 = run_at_node(ev.L, slots.s, k + 1);
        z[k + 1] = z[k] + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z;
}

// Everything derived from x that condition evaluations share.
struct TrajectoryData {
    SampledFunction d;
    std::vector<double> z; // empty unless Herglotz
};

inline TrajectoryData make_trajectory(const SampledFunction& x, const Problem& p,
                                      const LagrangianEval& ev) {
    TrajectoryData td{trajectory_deriv(x, p.params), {}};
    if (auto* hz = std::get_if<HerglotzKind>(&p.kind))
        td.z = integrate_herglotz(ev, x, td.d, hz->z_a);
    return td;
}

// program values along the trajectory, as a single-component function
inline SampledFunction eval_along(const Program& prog, const SampledFunction& x,
                                  const TrajectoryData& td, const LagrangianEval& ev) {
    const Grid& g = *x.grid;
    SampledFunction out(x.grid, 1);
    SlotBuffer slots(ev.m, ev.has_z);
    for (std::size_t k = 0; k <= g.n; ++k) {
        slots.set(g.nodes[k], x, td.d, td.z, k);
        out.values[k] = run_at_node(prog, slots.s, k);
    }
    return out;
}

// grid restricted to nodes [0, cut]; node arrays are copied verbatim so the
// sub-operators see exactly the same coordinates
inline GridPtr subgrid(const GridPtr& g, std::size_t cut) {
    auto sg = std::make_shared<Grid>();
    sg->a = g->a;
    sg->b = g->nodes[cut];
    sg->n = cut;
    sg->rho = g->rho;
    sg->spacing = g->spacing;
    sg->nodes.assign(g->nodes.begin(), g->nodes.begin() + cut + 1);
    sg->s_nodes.assign(g->s_nodes.begin(), g->s_nodes.begin() + cut + 1);
    sg->uniform_s = g->uniform_s;
    sg->hs = g->hs;
    return sg;
}

inline SampledFunction restrict_to(const GridPtr& sg, std::span<const double> vals) {
    SampledFunction out(sg, 1);
    std::copy(vals.begin(), vals.begin() + sg->n + 1, out.comp(0).begin());
    return out;
}

// trapezoid weights over [t_cut, b], zero left of the cut
inline std::vector<double> cost_weights(const Grid& g, std::size_t cut) {
    std::vector<double> w(g.n + 1, 0.0);
    for (std::size_t k = cut; k < g.n; ++k) {
        const double half = 0.5 * (g.nodes[k + 1] - g.nodes[k]);
        w[k] += half;
        w[k + 1] += half;
    }
    return w;
}

inline double weighted_sum(std::span<const double> w, std::span<const double> f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * f[k];
    return acc;
}

// cumulative trapezoid of v over the t-nodes, result[0] = 0
inline std::vector<double> cumtrap(const Grid& g, std::span<const double> v) {
    std::vector<double> out(g.n + 1, 0.0);
    for (std::size_t k = 0; k < g.n; ++k)
        out[k + 1] = out[k] + 0.5 * (g.nodes[k + 1] - g.nodes[k]) * (v[k] + v[k + 1]);
    return out;
}

// integrating factor lambda(t) = exp(-int_a^t dL/dz)
inline std::vector<double> herglotz_lambda(const LagrangianEval& ev,
                                           const SampledFunction& x,
                                           const TrajectoryData& td) {
    SampledFunction dz = eval_along(ev.dLdz, x, td, ev);
    std::vector<double> lam = cumtrap(*x.grid, dz.comp(0));
    for (double& v : lam) v = std::exp(-v);
    return lam;
}

} // namespace detail

// J(x) = int L(t, x, cD x) dt over [a,b], or over [A,b] for split-domain
// problems. For Herglotz problems z is bound along the state trajectory.
inline double functional_value(const SampledFunction& x, const Problem& p) {
    detail::LagrangianEval ev = detail::make_eval(p.lagrangian);
    detail::TrajectoryData td = detail::make_trajectory(x, p, ev);
    SampledFunction Lv = detail::eval_along(ev.L, x, td, ev);
    const auto w = detail::cost_weights(*x.grid, p.cut_node());
    return detail::weighted_sum(w, Lv.comp(0));
}

// Euler-Lagrange residual, one component per dependent variable:
//   plain/split  dL/dx_i - D_{b-}(dL/dd_i)   on the cost interval
//   split, [a,A) D_{A-}(dL/dd_i) - D_{b-}(dL/dd_i)
//   holonomic    adds lambda(t) dg/dx_i with lambda from the multiplier formula
//   Herglotz     lambda dL/dx - D_{b-}(lambda dL/dd), lambda = exp(-int dL/dz)
inline SampledFunction el_residual(const SampledFunction& x, const Problem& p) {
    detail::LagrangianEval ev = detail::make_eval(p.lagrangian);
    detail::TrajectoryData td = detail::make_trajectory(x, p, ev);
    const Grid& g = *x.grid;
    const std::size_t m = p.m();
    SampledFunction res(x.grid, m);

    if (auto* hz = std::get_if<HerglotzKind>(&p.kind)) {
        (void)hz;
        const std::vector<double> lam = detail::herglotz_lambda(ev, x, td);
        SampledFunction p2 = detail::eval_along(ev.dLdx[0], x, td, ev);
        SampledFunction p3 = detail::eval_along(ev.dLdd[0], x, td, ev);
        for (std::size_t k = 0; k <= g.n; ++k) p3.values[k] *= lam[k];
        SampledFunction rd = right_deriv(p3, p.params);
        for (std::size_t k = 0; k <= g.n; ++k)
            res.values[k] = lam[k] * p2.values[k] - rd.values[k];
        return res;
    }

    std::optional<SampledFunction> lambda_fn;
    std::vector<SampledFunction> dgdx;
    if (auto* holo = std::get_if<HolonomicKind>(&p.kind)) {
        // lambda(t) = -(dL/dx2 - D_{b-}(dL/dd2)) / (dg/dx2)
        const std::vector<std::string> gslots{"t", "x1", "x2"};
        const ExprPtr gb = substitute(holo->g, p.lagrangian.params);
        SampledFunction p3 = detail::eval_along(ev.dLdx[1], x, td, ev);
        SampledFunction p5 = detail::eval_along(ev.dLdd[1], x, td, ev);
        SampledFunction rd5 = right_deriv(p5, p.params);
        lambda_fn = SampledFunction(x.grid, 1);
        for (std::size_t v = 1; v <= 2; ++v) {
            Program dg = compile(diff(gb, "x" + std::to_string(v)), gslots);
            SampledFunction out(x.grid, 1);
            std::vector<double> slots(3);
            for (std::size_t k = 0; k <= g.n; ++k) {
                slots[0] = g.nodes[k];
                slots[1] = x.at(0, k);
                slots[2] = x.at(1, k);
                out.values[k] = detail::run_at_node(dg, slots, k);
            }
            dgdx.push_back(std::move(out));
        }
        for (std::size_t k = 0; k <= g.n; ++k) {
            const double g3 = dgdx[1].values[k];
            if (std::abs(g3) < 1e-10) throw SingularConstraint(k);
            lambda_fn->values[k] = -(p3.values[k] - rd5.values[k]) / g3;
        }
    }

    const std::size_t cut = p.cut_node();
    for (std::size_t i = 0; i < m; ++i) {
        SampledFunction p2 = detail::eval_along(ev.dLdx[i], x, td, ev);
        SampledFunction p3 = detail::eval_along(ev.dLdd[i], x, td, ev);
        SampledFunction rd = right_deriv(p3, p.params);
        for (std::size_t k = 0; k <= g.n; ++k)
            res.at(i, k) = p2.values[k] - rd.values[k];
        if (lambda_fn)
            for (std::size_t k = 0; k <= g.n; ++k)
                res.at(i, k) += lambda_fn->values[k] * dgdx[i].values[k];
        if (cut > 0) {
            // left of the cut the x-derivative term drops out and the
            // sub-interval operator D_{A-} replaces it
            GridPtr sg = detail::subgrid(x.grid, cut);
            SampledFunction pa = detail::restrict_to(sg, p3.comp(0));
            SampledFunction rda = right_deriv(pa, p.params);
            for (std::size_t k = 0; k < cut; ++k)
                res.at(i, k) = rda.values[k] - rd.values[k];
        }
    }
    return res;
}

// Natural boundary values I_{b-}^{1-alpha}(dL/dd) at t=a and t=b; a free
// endpoint requires the corresponding value to vanish. For the split domain
// the left value is I_{A-}^{1-alpha}(.) - I_{b-}^{1-alpha}(.) at t=a. With
// several components the value of largest magnitude is reported.
inline std::pair<double, double> transversality(const SampledFunction& x, const Problem& p) {
    detail::LagrangianEval ev = detail::make_eval(p.lagrangian);
    detail::TrajectoryData td = detail::make_trajectory(x, p, ev);
    const FracParams q(1.0 - p.params.alpha, p.params.rho);
    const std::size_t cut = p.cut_node();
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < p.m(); ++i) {
        SampledFunction p3 = detail::eval_along(ev.dLdd[i], x, td, ev);
        SampledFunction v = right_integral(p3, q);
        double li = v.values[0];
        if (cut > 0) {
            GridPtr sg = detail::subgrid(x.grid, cut);
            SampledFunction pa = detail::restrict_to(sg, p3.comp(0));
            li = right_integral(pa, q).values[0] - v.values[0];
        }
        const double ri = v.values[x.grid->n];
        if (std::abs(li) > std::abs(left)) left = li;
        if (std::abs(ri) > std::abs(right)) right = ri;
    }
    return {left, right};
}

// min over nodes and components of d2L/dd_i^2 along the trajectory
inline double legendre_margin(const SampledFunction& x, const Problem& p) {
    detail::LagrangianEval ev = detail::make_eval(p.lagrangian);
    detail::TrajectoryData td = detail::make_trajectory(x, p, ev);
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.m(); ++i) {
        SampledFunction h = detail::eval_along(ev.d2Ldd[i], x, td, ev);
        for (std::size_t k = p.cut_node(); k <= x.grid->n; ++k)
            margin = std::min(margin, h.values[k]);
    }
    return margin;
}

// | int x cD y - [y I_{b-}^{1-a} x]_a^b + int y D_{b-} x |, all pieces
// evaluated with this module's discrete operators; ties the left and right
// operator families together.
inline double ibp_defect(const SampledFunction& x_vals, const SampledFunction& y_vals,
                         const FracParams& p) {
    if (x_vals.grid.get() != y_vals.grid.get())
        throw DomainError("ibp_defect: x and y must share a grid");
    const Grid& g = *x_vals.grid;
    SampledFunction dy = ck_deriv(y_vals, p);
    std::vector<double> prod(g.n + 1);
    for (std::size_t k = 0; k <= g.n; ++k)
        prod[k] = x_vals.values[k] * dy.values[k];
    const double lhs = quad_trapezoid(prod, g);

    const FracParams q(1.0 - p.alpha, p.rho);
    SampledFunction ix = right_integral(x_vals, q);
    const double boundary = y_vals.values[g.n] * ix.values[g.n] -
                            y_vals.values[0] * ix.values[0];
    SampledFunction dx = right_deriv(x_vals, p);
    for (std::size_t k = 0; k <= g.n; ++k)
        prod[k] = y_vals.values[k] * dx.values[k];
    const double rhs = boundary - quad_trapezoid(prod, g);
    return std::abs(lhs - rhs);
}

// |I(x) - l| for isoperimetric problems, sup|g| for holonomic ones.
inline double constraint_defect(const SampledFunction& x, const Problem& p) {
    if (auto* iso = std::get_if<IsoperimetricKind>(&p.kind)) {
        detail::LagrangianEval gev = detail::make_eval(iso->g);
        detail::TrajectoryData td{trajectory_deriv(x, p.params), {}};
        SampledFunction gv = detail::eval_along(gev.L, x, td, gev);
        return std::abs(quad_trapezoid(gv.comp(0), *x.grid) - iso->l);
    }
    if (auto* holo = std::get_if<HolonomicKind>(&p.kind)) {
        const ExprPtr gb = substitute(holo->g, p.lagrangian.params);
        Program gp = compile(gb, {"t", "x1", "x2"});
        double worst = 0.0;
        std::vector<double> slots(3);
        for (std::size_t k = 0; k <= x.grid->n; ++k) {
            slots[0] = x.grid->nodes[k];
            slots[1] = x.at(0, k);
            slots[2] = x.at(1, k);
            worst = std::max(worst, std::abs(detail::run_at_node(gp, slots, k)));
        }
        return worst;
    }
    throw KindError("constraint_defect: problem kind has no constraint");
}

// lambda(t) = -(dL/dx2 - D_{b-}(dL/dd2)) / (dg/dx2) along the trajectory.
inline SampledFunction holonomic_multiplier(const SampledFunction& x, const Problem& p) {
    auto* holo = std::get_if<HolonomicKind>(&p.kind);
    if (!holo) throw KindError("holonomic_multiplier: problem is not holonomic");
    detail::LagrangianEval ev = detail::make_eval(p.lagrangian);
    detail::TrajectoryData td{trajectory_deriv(x, p.params), {}};
    SampledFunction p3 = detail::eval_along(ev.dLdx[1], x, td, ev);
    SampledFunction p5 = detail::eval_along(ev.dLdd[1], x, td, ev);
    SampledFunction rd5 = right_deriv(p5, p.params);

    const ExprPtr gb = substitute(holo->g, p.lagrangian.params);
    Program g3p = compile(diff(gb, "x2"), {"t", "x1", "x2"});
    SampledFunction lam(x.grid, 1);
    std::vector<double> slots(3);
    for (std::size_t k = 0; k <= x.grid->n; ++k) {
        slots[0] = x.grid->nodes[k];
        slots[1] = x.at(0, k);
        slots[2] = x.at(1, k);
        const double g3 = detail::run_at_node(g3p, slots, k);
        if (std::abs(g3) < 1e-10) throw SingularConstraint(k);
        lam.values[k] = -(p3.values[k] - rd5.values[k]) / g3;
    }
    return lam;
}

// Herglotz state along the trajectory (z(a) = z_a from the problem kind).
inline std::vector<double> herglotz_state(const SampledFunction& x, const Problem& p) {
    auto* hz = std::get_if<HerglotzKind>(&p.kind);
    if (!hz) throw KindError("herglotz_state: problem is not a Herglotz problem");
    detail::LagrangianEval ev = detail::make_eval(p.lagrangian);
    SampledFunction d = trajectory_deriv(x, p.params);
    return detail::integrate_herglotz(ev, x, d, hz->z_a);
}

// Full certificate bundle for one trajectory. Everything here is a function
// of (x, problem) alone, so a later `check` run reproduces it exactly.
inline Diagnostics compute_diagnostics(const SampledFunction& x, const Problem& p) {
    Diagnostics d;
    d.J_value = functional_value(x, p);
    d.el_residual = el_residual(x, p);
    double norm2 = 0.0;
    std::vector<double> sq(x.grid->n + 1);
    for (std::size_t i = 0; i < p.m(); ++i) {
        for (std::size_t k = 0; k <= x.grid->n; ++k) {
            const double r = d.el_residual.at(i, k);
            sq[k] = r * r;
        }
        const double c2 = quad_trapezoid(sq, *x.grid);
        d.el_residual_norms.push_back(std::sqrt(c2));
        norm2 += c2;
    }
    d.el_residual_norm = std::sqrt(norm2);
    auto tv = transversality(x, p);
    d.transversality_left = tv.first;
    d.transversality_right = tv.second;
    d.legendre_min = legendre_margin(x, p);
    d.constraint_defect = 0.0;
    if (std::holds_alternative<IsoperimetricKind>(p.kind) ||
        std::holds_alternative<HolonomicKind>(p.kind))
        d.constraint_defect = constraint_defect(x, p);

    // operator-consistency certificate: pair (dL/dd_i along x, x_i)
    detail::LagrangianEval ev = detail::make_eval(p.lagrangian);
    detail::TrajectoryData td = detail::make_trajectory(x, p, ev);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.m(); ++i) {
        SampledFunction p3 = detail::eval_along(ev.dLdd[i], x, td, ev);
        SampledFunction xi(x.grid, 1);
        std::copy(x.comp(i).begin(), x.comp(i).end(), xi.comp(0).begin());
        worst = std::max(worst, ibp_defect(p3, xi, p.params));
    }
    d.ibp_defect = worst;
    return d;
}

// Sampled convexity probe: the Hessian of L in (x, d) is checked for
// positive semidefiniteness at grid nodes with the trajectory values nudged
// by a few offsets. A report flag, not a proof.
inline bool convexity_sampled(const Lagrangian& lag, const SampledFunction& x,
                              const FracParams& params, bool negate = false) {
    detail::LagrangianEval ev = detail::make_eval(lag);
    const std::size_t m = lag.m;
    const std::size_t dim = 2 * m;
    const auto slots_names = lag.slot_names();
    const ExprPtr bound = lag.bound_expr();

    // all second partials in (x1..xm, d1..dm)
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= m; ++i) names.push_back("x" + std::to_string(i));
    for (std::size_t i = 1; i <= m; ++i) names.push_back("d" + std::to_string(i));
    std::vector<Program> hess;
    for (std::size_t i = 0; i < dim; ++i) {
        ExprPtr di = diff(bound, names[i]);
        for (std::size_t j = 0; j <= i; ++j)
            hess.push_back(compile(diff(di, names[j]), slots_names));
    }

    SampledFunction d = trajectory_deriv(x, params);
    detail::SlotBuffer slots(m, lag.has_z);
    const Grid& g = *x.grid;
    const std::size_t stride = std::max<std::size_t>(1, g.n / 16);
    static constexpr double offsets[3] = {0.0, 0.7, -0.7};
    std::vector<double> H(dim * dim), diag(dim);

    for (std::size_t k = 0; k <= g.n; k += stride) {
        for (double ox : offsets) {
            for (double od : offsets) {
                slots.set(g.nodes[k], x, d, {}, k);
                for (std::size_t i = 0; i < m; ++i) {
                    slots.s[1 + i] += ox;
                    slots.s[1 + m + i] += od;
                }
                std::size_t idx = 0;
                double scale = 0.0;
                for (std::size_t i = 0; i < dim; ++i)
                    for (std::size_t j = 0; j <= i; ++j) {
                        double v = detail::run_at_node(hess[idx++], slots.s, k);
                        if (negate) v = -v;
                        H[i * dim + j] = H[j * dim + i] = v;
                        scale = std::max(scale, std::abs(v));
                    }
                // LDL^T pivots; PSD up to a relative tolerance
                const double tol = 1e-9 * (1.0 + scale);
                std::vector<double> A(H);
                bool psd = true;
                for (std::size_t i = 0; i < dim && psd; ++i) {
                    double piv = A[i * dim + i];
                    if (piv < -tol) { psd = false; break; }
                    if (piv <= tol) {
                        // zero pivot: the row must vanish too
                        for (std::size_t j = i + 1; j < dim; ++j)
                            if (std::abs(A[i * dim + j]) > 1e-7 * (1.0 + scale)) { psd = false; break; }
                        continue;
                    }
                    for (std::size_t r = i + 1; r < dim; ++r) {
                        const double f = A[r * dim + i] / piv;
                        for (std::size_t c = i; c < dim; ++c)
                            A[r * dim + c] -= f * A[i * dim + c];
                    }
                }
                if (!psd) return false;
            }
        }
    }
    return true;
}

} // namespace fracvar
