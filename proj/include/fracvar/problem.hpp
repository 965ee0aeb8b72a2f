#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/expr.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/grid.hpp"

namespace fracvar {

// Fixed endpoint carries one value per component; nullopt means free.
using BoundaryCondition = std::optional<std::vector<double>>;

struct PlainKind {};
struct SplitDomainKind {
    double A = 0;          // interior cut point; must sit on a grid node
    std::size_t node = 0;  // resolved node index of A
};
struct IsoperimetricKind {
    Lagrangian g;  // constraint integrand g(t, x, cD x)
    double l = 0;  // prescribed integral value
};
struct HolonomicKind {
    ExprPtr g;  // surface g(t, x1, x2) = 0
};
struct HerglotzKind {
    double z_a = 0;
};

using ProblemKind =
    std::variant<PlainKind, SplitDomainKind, IsoperimetricKind, HolonomicKind, HerglotzKind>;

// Complete description of one variational problem. Construct through
// make_problem so the cross-field invariants hold.
struct Problem {
    Lagrangian lagrangian;
    FracParams params;
    GridPtr grid;
    BoundaryCondition bc_left;   // value of x at t=a (or at t=A for split domain)
    BoundaryCondition bc_right;  // value of x at t=b
    ProblemKind kind;

    std::size_t m() const { return lagrangian.m; }
    bool is_split() const { return std::holds_alternative<SplitDomainKind>(kind); }
    bool is_herglotz() const { return std::holds_alternative<HerglotzKind>(kind); }

    // node index where the cost integral starts (A for split, else 0)
    std::size_t cut_node() const {
        if (auto* s = std::get_if<SplitDomainKind>(&kind)) return s->node;
        return 0;
    }
};

namespace detail {

inline void check_bc(const BoundaryCondition& bc, std::size_t m, const char* side) {
    if (bc && bc->size() != m)
        throw DomainError(std::string("boundary condition at ") + side + " must list " +
                          std::to_string(m) + " value(s)");
}

} // namespace detail

inline Problem make_problem(Lagrangian lagrangian, FracParams params, GridPtr grid,
                            BoundaryCondition bc_left, BoundaryCondition bc_right,
                            ProblemKind kind) {
    lagrangian.validate();
    detail::check_bc(bc_left, lagrangian.m, "left");
    detail::check_bc(bc_right, lagrangian.m, "right");

    if (auto* s = std::get_if<SplitDomainKind>(&kind)) {
        if (!(s->A > grid->a) || !(s->A < grid->b))
            throw DomainError("split domain: A must lie strictly inside (a,b)");
        const double tol = 1e-9 * (grid->b - grid->a);
        std::size_t node = 0;
        bool found = false;
        for (std::size_t k = 1; k < grid->n; ++k) {
            if (std::abs(grid->nodes[k] - s->A) <= tol) {
                node = k;
                found = true;
                break;
            }
        }
        if (!found) throw DomainError("split domain: A does not land on a grid node");
        s->node = node;
    }
    if (auto* iso = std::get_if<IsoperimetricKind>(&kind)) {
        iso->g.m = lagrangian.m;
        iso->g.validate();
        if (iso->g.has_z) throw DomainError("isoperimetric constraint may not involve z");
    }
    if (auto* holo = std::get_if<HolonomicKind>(&kind)) {
        if (lagrangian.m != 2) throw DomainError("holonomic problems require m = 2");
        for (const auto& v : free_vars(holo->g)) {
            if (v == "t" || v == "x1" || v == "x2") continue;
            if (lagrangian.params.count(v)) continue;
            if (v == "d1" || v == "d2")
                throw DomainError("holonomic constraint must not depend on d-variables");
            throw UnknownIdentifierError(v);
        }
    }
    if (std::holds_alternative<HerglotzKind>(kind)) {
        if (!lagrangian.has_z) throw DomainError("Herglotz problems require has_z");
        if (lagrangian.m != 1) throw DomainError("Herglotz problems support m = 1");
        if (!bc_left || !bc_right)
            throw DomainError("Herglotz problems require fixed boundary conditions");
    }

    return Problem{std::move(lagrangian), params, std::move(grid),
                   std::move(bc_left), std::move(bc_right), std::move(kind)};
}

// Residual/certificate bundle attached to a trajectory.
struct Diagnostics {
    double J_value = 0;
    SampledFunction el_residual;      // m components
    double el_residual_norm = 0;      // t-weighted discrete L2 over all components
    std::vector<double> el_residual_norms;  // per component
    double transversality_left = 0;   // max |.| over components
    double transversality_right = 0;
    double legendre_min = 0;
    double constraint_defect = 0;     // 0 when the kind has no constraint
    double ibp_defect = 0;
};

} // namespace fracvar
