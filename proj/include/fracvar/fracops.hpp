#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/gamma.hpp"
#include "fracvar/grid.hpp"

// Discrete forms of the four operators
//
//   left derivative   cD_{a+}^{a,r} x(t) = r^a/G(1-a) Int_a^t (t^r - u^r)^-a x'(u) du
//   left integral      I_{a+}^{a,r} x(t) = r^(1-a)/G(a) Int_a^t u^(r-1) (t^r - u^r)^(a-1) x(u) du
//   right integral     I_{b-}^{a,r} x(t) = r^(1-a)/G(a) Int_t^b (u^r - t^r)^(a-1) x(u) du
//   right derivative   D_{b-}^{a,r} x(t) = r^a/G(1-a) d/dt Int_t^b (u^r - t^r)^-a x(u) du
//
// Everything is computed in the transformed variable s = t^r, where the
// kernels become classical Caputo / Riemann-Liouville kernels:
//
//   cD_{a+}^{a,r} x(t)  = r^a  * (Caputo_s^a y)(s),        y(s) = x(s^(1/r))
//   I_{a+}^{a,r} x(t)   = r^-a * (RL_s^a y)(s)
//   I_{b-}^{q,r} x(t)   = r^-q/G(q) Int_s^S (o - s)^(q-1) w(o) do,  w(o) = y(o) o^(1/r - 1)
//   D_{b-}^{a,r} x(t)   = r^a/G(1-a) t^(r-1) d/ds Int_s^S (o - s)^-a w(o) do
//
// (the right-sided kernels carry no u^(r-1) weight, so the substitution
// leaves the extra o^(1/r-1) factor inside the integrand). The integrands
// are modelled piecewise-linearly between s-nodes and the kernel moments
// are integrated exactly (L1 / product-trapezoid family). Grids must be
// uniform in s; weights then depend only on index differences, so each
// power is tabulated once per call.

namespace fracvar {

struct FracParams {
    double alpha;
    double rho;

    FracParams(double a, double r) : alpha(a), rho(r) {
        if (!(alpha > 0.0) || !(alpha < 1.0))
            throw DomainError("FracParams: alpha must lie strictly in (0,1)");
        if (!(rho > 0.0)) throw DomainError("FracParams: rho must be > 0");
    }
};

enum class OpKind { LeftInt, LeftDeriv, RightInt, RightDeriv };

namespace detail {

inline void require_operator_grid(const Grid& g, const SampledFunction& x) {
    if (!g.uniform_s)
        throw DomainError("fractional operator requires a grid uniform in s = t^rho");
    if (x.components != 1)
        throw DomainError("fractional operator expects a single-component function");
    if (x.grid.get() != &g) throw DomainError("sampled function is not on this grid");
}

// i^p for i = 0..n, one pow per index
inline std::vector<double> power_table(std::size_t n, double p) {
    std::vector<double> t(n + 1);
    t[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) t[i] = std::pow(static_cast<double>(i), p);
    return t;
}

// structurally nonzero column range of row k
inline std::size_t row_lo(OpKind kind, std::size_t k, std::size_t n) {
    switch (kind) {
        case OpKind::LeftInt:
        case OpKind::LeftDeriv: return 0;
        case OpKind::RightInt: return k;
        case OpKind::RightDeriv: return k < n ? k : n - 2;
    }
    return 0;
}
inline std::size_t row_hi(OpKind kind, std::size_t k, std::size_t n) {
    switch (kind) {
        case OpKind::LeftInt:
        case OpKind::LeftDeriv: return k;
        default: return n;
    }
}

// Shared per-call state so assembling a matrix and applying the operator
// directly run the identical arithmetic.
struct WeightPlan {
    OpKind kind;
    double alpha, rho, hs;
    std::size_t n;
    const Grid* grid;
    std::vector<double> tp;    // i^p main exponent table
    std::vector<double> tp1;   // i^(p+1) table (integrals)
    std::vector<double> tneg;  // i^-alpha (right derivative boundary term)
    std::vector<double> wfac;  // t_k^(1-rho) factors (right-sided operators)
    double scale = 0;
};

inline WeightPlan make_plan(OpKind kind, const FracParams& p, const Grid& g) {
    WeightPlan w;
    w.kind = kind;
    w.alpha = p.alpha;
    w.rho = p.rho;
    w.hs = g.hs;
    w.n = g.n;
    w.grid = &g;
    const double a = p.alpha;
    switch (kind) {
        case OpKind::LeftDeriv:
            w.tp = power_table(g.n, 1.0 - a);
            w.scale = std::pow(p.rho, a) * std::pow(g.hs, -a) / gamma(2.0 - a);
            break;
        case OpKind::LeftInt:
            w.tp = power_table(g.n, a);
            w.tp1 = power_table(g.n, a + 1.0);
            w.scale = std::pow(p.rho, -a) * std::pow(g.hs, a) / gamma(a);
            break;
        case OpKind::RightInt:
            w.tp = power_table(g.n, a);
            w.tp1 = power_table(g.n, a + 1.0);
            w.scale = std::pow(p.rho, -a) * std::pow(g.hs, a) / gamma(a);
            break;
        case OpKind::RightDeriv:
            w.tp = power_table(g.n, 1.0 - a);
            w.tp1 = power_table(g.n, 1.0 - a + 1.0); // order 1-a integral table
            w.tneg = power_table(g.n, -a);
            w.scale = std::pow(p.rho, a) * std::pow(g.hs, -a) / gamma(1.0 - a);
            break;
    }
    if (kind == OpKind::RightInt || kind == OpKind::RightDeriv) {
        w.wfac.resize(g.n + 1);
        for (std::size_t j = 0; j <= g.n; ++j)
            w.wfac[j] = (p.rho == 1.0) ? 1.0 : std::pow(g.nodes[j], 1.0 - p.rho);
    }
    return w;
}

// Row of the product-integration matrix for the right integral of order q:
// on each s-interval [s_j, s_j+1] the weighted samples w_j = x_j t_j^(1-r)
// are linear; moments of (o - s_k)^(q-1) are exact.
inline void right_int_row(const WeightPlan& w, double q, std::size_t k,
                          std::span<double> out) {
    const std::size_t n = w.n;
    for (double& v : out) v = 0.0;
    if (k == n) return;
    const double c = w.scale; // r^-q h^q / G(q)
    for (std::size_t j = k; j < n; ++j) {
        const std::size_t i = j - k;
        const double dT = w.tp[i + 1] - w.tp[i];
        const double n0 = dT / q;
        const double n1 = (w.tp1[i + 1] - w.tp1[i]) / (q + 1.0) -
                          static_cast<double>(i) * dT / q;
        out[j] += c * (n0 - n1) * w.wfac[j];
        out[j + 1] += c * n1 * w.wfac[j + 1];
    }
}

inline void build_row(const WeightPlan& w, std::size_t k, std::span<double> out) {
    const std::size_t n = w.n;
    const double a = w.alpha;
    switch (w.kind) {
        case OpKind::LeftDeriv: {
            for (double& v : out) v = 0.0;
            if (k == 0) return; // cD x(a) = 0
            for (std::size_t j = 0; j < k; ++j) {
                const double m = w.scale * (w.tp[k - j] - w.tp[k - j - 1]);
                out[j] -= m;
                out[j + 1] += m;
            }
            return;
        }
        case OpKind::LeftInt: {
            for (double& v : out) v = 0.0;
            if (k == 0) return;
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t i = k - j; // distance of left interval edge
                const double dT = w.tp[i] - w.tp[i - 1];
                const double m0 = dT / a;
                const double m1 = static_cast<double>(i) * dT / a -
                                  (w.tp1[i] - w.tp1[i - 1]) / (a + 1.0);
                out[j] += w.scale * (m0 - m1);
                out[j + 1] += w.scale * m1;
            }
            return;
        }
        case OpKind::RightInt:
            right_int_row(w, a, k, out);
            return;
        case OpKind::RightDeriv: {
            for (double& v : out) v = 0.0;
            if (k < n) {
                // exact d/ds of the product-integration inner integral:
                // G'(s) = -(S-s)^-a w(S) + Int_s^S (o-s)^-a w'(o) do
                const double c = w.scale * ((w.rho == 1.0) ? 1.0
                                  : std::pow(w.grid->nodes[k], w.rho - 1.0));
                out[n] -= c * w.tneg[n - k] * w.wfac[n];
                for (std::size_t j = k; j < n; ++j) {
                    const double m = c * (w.tp[j + 1 - k] - w.tp[j - k]) / (1.0 - a);
                    out[j] -= m * w.wfac[j];
                    out[j + 1] += m * w.wfac[j + 1];
                }
            } else {
                // t = b: the kernel value diverges for x(b) != 0, so the row
                // is the second-order one-sided stencil in s applied to the
                // order-(1-a) inner integral G, G(s_n) = 0.
                WeightPlan wi = w;
                wi.scale = std::pow(w.rho, -(1.0 - a)) * std::pow(w.hs, 1.0 - a) /
                           gamma(1.0 - a);
                std::vector<double> row1(n + 1), row2(n + 1);
                right_int_row(wi, 1.0 - a, n - 1, row1);
                right_int_row(wi, 1.0 - a, n - 2, row2);
                // G = G(1-a) r^(1-a) * I_{b-}^{1-a}; D row = r t^(r-1)/(2h) (G_{n-2} - 4 G_{n-1})
                const double c = gamma(1.0 - a) * std::pow(w.rho, 1.0 - a) * w.rho *
                                 ((w.rho == 1.0) ? 1.0
                                  : std::pow(w.grid->nodes[n], w.rho - 1.0)) /
                                 (2.0 * w.hs);
                for (std::size_t j = n - 2; j <= n; ++j)
                    out[j] = c * (row2[j] - 4.0 * row1[j]);
            }
            return;
        }
    }
}

inline void apply_row(OpKind kind, std::size_t k, std::size_t n,
                      std::span<const double> row, std::span<const double> x,
                      double& out) {
    double acc = 0.0;
    const std::size_t lo = row_lo(kind, k, n), hi = row_hi(kind, k, n);
    for (std::size_t j = lo; j <= hi; ++j) acc += row[j] * x[j];
    out = acc;
}

inline SampledFunction apply_operator(OpKind kind, const SampledFunction& x,
                                      const FracParams& p) {
    const Grid& g = *x.grid;
    require_operator_grid(g, x);
    WeightPlan plan = make_plan(kind, p, g);
    SampledFunction out(x.grid, 1);
    std::vector<double> row(g.n + 1);
    for (std::size_t k = 0; k <= g.n; ++k) {
        build_row(plan, k, row);
        apply_row(kind, k, g.n, row, x.comp(0), out.values[k]);
    }
    return out;
}

// General (non-uniform) product-integration form of the left derivative on
// an arbitrary increasing sigma grid. Used when differentiating the operator
// in rho at fixed t-nodes, where the transformed grid stops being uniform.
inline std::vector<double> left_deriv_nonuniform(std::span<const double> x,
                                                 std::span<const double> sigma,
                                                 double alpha, double rho) {
    const std::size_t n = sigma.size() - 1;
    std::vector<double> out(n + 1, 0.0);
    const double c = std::pow(rho, alpha) / ((1.0 - alpha) * gamma(1.0 - alpha));
    for (std::size_t k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double slope = (x[j + 1] - x[j]) / (sigma[j + 1] - sigma[j]);
            acc += slope * (std::pow(sigma[k] - sigma[j], 1.0 - alpha) -
                            std::pow(sigma[k] - sigma[j + 1], 1.0 - alpha));
        }
        out[k] = c * acc;
    }
    return out;
}

} // namespace detail

// Dense triangular matrix representation of one operator on one grid.
// apply() runs the same row arithmetic as the direct operator calls, so
// M * values reproduces them bit for bit.
struct OperatorMatrix {
    OpKind kind;
    FracParams params;
    GridPtr grid;
    std::vector<double> weights; // (n+1) x (n+1), row-major

    std::size_t dim() const { return grid->n + 1; }
    double entry(std::size_t k, std::size_t j) const { return weights[k * dim() + j]; }

    void apply(std::span<const double> x, std::span<double> out) const {
        const std::size_t d = dim();
        if (x.size() != d || out.size() != d)
            throw DomainError("OperatorMatrix::apply: size mismatch");
        for (std::size_t k = 0; k < d; ++k)
            detail::apply_row(kind, k, grid->n, {weights.data() + k * d, d}, x, out[k]);
    }

    SampledFunction apply(const SampledFunction& x) const {
        detail::require_operator_grid(*grid, x);
        SampledFunction out(x.grid, 1);
        apply(x.comp(0), out.comp(0));
        return out;
    }
};

inline OperatorMatrix assemble_matrix(OpKind kind, const FracParams& p, const GridPtr& g) {
    if (!g->uniform_s)
        throw DomainError("assemble_matrix requires a grid uniform in s = t^rho");
    OperatorMatrix m{kind, p, g, {}};
    const std::size_t d = g->n + 1;
    m.weights.resize(d * d);
    detail::WeightPlan plan = detail::make_plan(kind, p, *g);
    for (std::size_t k = 0; k < d; ++k)
        detail::build_row(plan, k, {m.weights.data() + k * d, d});
    return m;
}

// cD_{a+}^{alpha,rho} x on the grid nodes; node 0 is exactly 0.
inline SampledFunction ck_deriv(const SampledFunction& x, const FracParams& p) {
    return detail::apply_operator(OpKind::LeftDeriv, x, p);
}

// I_{a+}^{alpha,rho} x; node 0 is exactly 0.
inline SampledFunction ck_integral(const SampledFunction& x, const FracParams& p) {
    return detail::apply_operator(OpKind::LeftInt, x, p);
}

// I_{b-}^{alpha,rho} x; node n is exactly 0.
inline SampledFunction right_integral(const SampledFunction& x, const FracParams& p) {
    return detail::apply_operator(OpKind::RightInt, x, p);
}

// D_{b-}^{alpha,rho} x (sign convention carries +d/dt, the adjoint pairing
// of the left derivative under integration by parts).
inline SampledFunction right_deriv(const SampledFunction& x, const FracParams& p) {
    return detail::apply_operator(OpKind::RightDeriv, x, p);
}

} // namespace fracvar
