#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fracvar/errors.hpp"

namespace fracvar {

enum class Spacing { UniformInT, UniformInS };

// Node set on [a,b], 0 < a < b, together with its power-transformed image
// s_k = t_k^rho. Both node arrays are stored; operators must read them
// instead of recomputing the transform so that repeated runs are bit-stable.
// Immutable after construction; share freely across threads.
struct Grid {
    double a = 0;
    double b = 0;
    std::size_t n = 0; // number of intervals; n+1 nodes
    double rho = 1;
    Spacing spacing = Spacing::UniformInS;
    std::vector<double> nodes;   // t_0 = a < ... < t_n = b
    std::vector<double> s_nodes; // s_k = t_k^rho, increasing
    bool uniform_s = false;      // s-steps equal to rounding tolerance
    double hs = 0;               // s-step when uniform_s

    std::size_t size() const { return n + 1; }
};

using GridPtr = std::shared_ptr<const Grid>;

inline double pow_rho(double t, double rho) {
    // exp/log form keeps t^rho accurate for t < 1 with tiny rho
    return std::exp(rho * std::log(t));
}

inline GridPtr make_grid(double a, double b, std::size_t n, double rho,
                         Spacing spacing = Spacing::UniformInS) {
    if (!(a > 0.0)) throw DomainError("make_grid: a must be > 0");
    if (!(a < b)) throw DomainError("make_grid: requires a < b");
    if (n < 2) throw DomainError("make_grid: n must be >= 2");
    if (!(rho > 0.0)) throw DomainError("make_grid: rho must be > 0");

    auto g = std::make_shared<Grid>();
    g->a = a;
    g->b = b;
    g->n = n;
    g->rho = rho;
    g->spacing = spacing;
    g->nodes.resize(n + 1);
    g->s_nodes.resize(n + 1);

    const double sa = pow_rho(a, rho);
    const double sb = pow_rho(b, rho);
    if (!std::isfinite(sa) || !std::isfinite(sb))
        throw DomainError("make_grid: t^rho overflows for this (b, rho)");
    if (spacing == Spacing::UniformInT) {
        const double ht = (b - a) / static_cast<double>(n);
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = (k == n) ? b : a + static_cast<double>(k) * ht;
            g->nodes[k] = t;
            g->s_nodes[k] = pow_rho(t, rho);
        }
    } else {
        const double hsv = (sb - sa) / static_cast<double>(n);
        for (std::size_t k = 0; k <= n; ++k) {
            const double s = (k == n) ? sb : sa + static_cast<double>(k) * hsv;
            g->s_nodes[k] = s;
            g->nodes[k] = (k == 0) ? a : (k == n) ? b : pow_rho(s, 1.0 / rho);
        }
    }

    for (std::size_t k = 0; k < n; ++k) {
        if (!(g->nodes[k] < g->nodes[k + 1]) || !(g->s_nodes[k] < g->s_nodes[k + 1]))
            throw DomainError("make_grid: nodes not strictly increasing (degenerate step)");
    }

    const double h0 = (g->s_nodes[n] - g->s_nodes[0]) / static_cast<double>(n);
    bool uniform = true;
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs((g->s_nodes[k + 1] - g->s_nodes[k]) - h0) > 1e-9 * h0) {
            uniform = false;
            break;
        }
    }
    g->uniform_s = uniform;
    g->hs = uniform ? h0 : 0.0;
    return g;
}

// Composite trapezoid weights on the t-nodes; exact for piecewise-linear f.
inline std::vector<double> trapezoid_weights(const Grid& g) {
    std::vector<double> w(g.n + 1, 0.0);
    for (std::size_t k = 0; k < g.n; ++k) {
        const double half = 0.5 * (g.nodes[k + 1] - g.nodes[k]);
        w[k] += half;
        w[k + 1] += half;
    }
    return w;
}

inline double quad_trapezoid(std::span<const double> f_values, const Grid& g) {
    if (f_values.size() != g.n + 1)
        throw DomainError("quad_trapezoid: value count does not match grid");
    double acc = 0.0;
    for (std::size_t k = 0; k < g.n; ++k)
        acc += 0.5 * (g.nodes[k + 1] - g.nodes[k]) * (f_values[k] + f_values[k + 1]);
    return acc;
}

// Node values of a (possibly vector-valued) function on a grid. Values are
// stored component-major: component c occupies [c*(n+1), (c+1)*(n+1)).
struct SampledFunction {
    GridPtr grid;
    std::size_t components = 1;
    std::vector<double> values;

    SampledFunction() = default;
    SampledFunction(GridPtr g, std::size_t m)
        : grid(std::move(g)), components(m), values(m * (grid->n + 1), 0.0) {}

    std::size_t size() const { return grid->n + 1; }

    std::span<double> comp(std::size_t c) {
        return {values.data() + c * size(), size()};
    }
    std::span<const double> comp(std::size_t c) const {
        return {values.data() + c * size(), size()};
    }
    double& at(std::size_t c, std::size_t k) { return values[c * size() + k]; }
    double at(std::size_t c, std::size_t k) const { return values[c * size() + k]; }
};

template <class F>
SampledFunction sample(GridPtr g, F&& f) {
    SampledFunction out(g, 1);
    for (std::size_t k = 0; k <= g->n; ++k) out.values[k] = f(g->nodes[k]);
    return out;
}

} // namespace fracvar
