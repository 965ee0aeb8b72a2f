#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracvar/errors.hpp"
#include "fracvar/problem.hpp"
#include "fracvar/solvers.hpp"
#include "fracvar/variational.hpp"

namespace fracvar {

// NaN/Inf must never reach an output file; this surfaces as an error instead.
class SerializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double checked(double v, const char* what) {
    if (!std::isfinite(v))
        throw SerializationError(std::string("non-finite value in output field '") + what + "'");
    return v;
}

} // namespace detail

// solution.csv: t, s, x_i..., ckd_x_i..., el_residual_i...; one row per node,
// 17 significant digits so values round-trip exactly.
inline void write_solution_csv(const std::string& path, const SampledFunction& x,
                               const SampledFunction& d, const SampledFunction& res) {
    const Grid& g = *x.grid;
    const std::size_t m = x.components;
    std::ofstream out(path);
    if (!out) throw SerializationError("cannot open '" + path + "' for writing");
    out << "t,s";
    for (std::size_t i = 1; i <= m; ++i) out << ",x" << i;
    for (std::size_t i = 1; i <= m; ++i) out << ",ckd_x" << i;
    for (std::size_t i = 1; i <= m; ++i) out << ",el_residual" << i;
    out << "\n";
    for (std::size_t k = 0; k <= g.n; ++k) {
        out << detail::fmt17(detail::checked(g.nodes[k], "t")) << ','
            << detail::fmt17(detail::checked(g.s_nodes[k], "s"));
        for (std::size_t i = 0; i < m; ++i)
            out << ',' << detail::fmt17(detail::checked(x.at(i, k), "x"));
        for (std::size_t i = 0; i < m; ++i)
            out << ',' << detail::fmt17(detail::checked(d.at(i, k), "ckd_x"));
        for (std::size_t i = 0; i < m; ++i)
            out << ',' << detail::fmt17(detail::checked(res.at(i, k), "el_residual"));
        out << "\n";
    }
}

// deriv command output: t, s, x, ckd_x
inline void write_deriv_csv(const std::string& path, const SampledFunction& x,
                            const SampledFunction& d) {
    const Grid& g = *x.grid;
    std::ofstream out(path);
    if (!out) throw SerializationError("cannot open '" + path + "' for writing");
    out << "t,s,x,ckd_x\n";
    for (std::size_t k = 0; k <= g.n; ++k) {
        out << detail::fmt17(detail::checked(g.nodes[k], "t")) << ','
            << detail::fmt17(detail::checked(g.s_nodes[k], "s")) << ','
            << detail::fmt17(detail::checked(x.values[k], "x")) << ','
            << detail::fmt17(detail::checked(d.values[k], "ckd_x")) << "\n";
    }
}

// Strict reader for the solve-format CSV; returns the x columns. The grid
// must match row-for-row (that is the "shape" in the contract).
inline SampledFunction read_solution_csv(const std::string& path, const GridPtr& grid,
                                         std::size_t m) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open solution file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DomainError("solution file is empty");
    {
        std::string expected = "t,s";
        for (std::size_t i = 1; i <= m; ++i) expected += ",x" + std::to_string(i);
        for (std::size_t i = 1; i <= m; ++i) expected += ",ckd_x" + std::to_string(i);
        for (std::size_t i = 1; i <= m; ++i) expected += ",el_residual" + std::to_string(i);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != expected)
            throw DomainError("solution header mismatch: expected '" + expected + "'");
    }
    SampledFunction x(grid, m);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (row > grid->n) throw DomainError("solution has more rows than grid nodes");
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const char* s = cell.c_str();
            char* end = nullptr;
            const double v = std::strtod(s, &end);
            if (end == s || *end != '\0')
                throw DomainError("row " + std::to_string(row + 2) + ": bad number '" + cell + "'");
            cells.push_back(v);
        }
        if (cells.size() != 2 + 3 * m)
            throw DomainError("row " + std::to_string(row + 2) + ": wrong column count");
        const double t = cells[0];
        if (std::abs(t - grid->nodes[row]) > 1e-12 * (1.0 + std::abs(grid->nodes[row])))
            throw DomainError("row " + std::to_string(row + 2) + ": t does not match the grid");
        for (std::size_t i = 0; i < m; ++i) x.at(i, row) = cells[2 + i];
        ++row;
    }
    if (row != grid->n + 1) throw DomainError("solution has fewer rows than grid nodes");
    return x;
}

namespace detail {

inline nlohmann::ordered_json diagnostics_json(const Diagnostics& d) {
    nlohmann::ordered_json j;
    j["J"] = checked(d.J_value, "J");
    j["el_residual_norm"] = checked(d.el_residual_norm, "el_residual_norm");
    nlohmann::ordered_json norms = nlohmann::ordered_json::array();
    for (double v : d.el_residual_norms) norms.push_back(checked(v, "el_residual_norms"));
    j["el_residual_norms"] = norms;
    j["transversality_left"] = checked(d.transversality_left, "transversality_left");
    j["transversality_right"] = checked(d.transversality_right, "transversality_right");
    j["legendre_min"] = checked(d.legendre_min, "legendre_min");
    j["legendre_ok"] = d.legendre_min >= 0.0;
    j["constraint_defect"] = checked(d.constraint_defect, "constraint_defect");
    j["ibp_defect"] = checked(d.ibp_defect, "ibp_defect");
    return j;
}

inline nlohmann::ordered_json problem_json(const ProblemFile& pf) {
    nlohmann::ordered_json j;
    j["kind"] = pf.kind;
    j["alpha"] = pf.params.alpha;
    j["rho"] = pf.params.rho;
    j["a"] = pf.grid->a;
    j["b"] = pf.grid->b;
    j["n"] = pf.grid->n;
    j["m"] = pf.problem ? pf.problem->m() : 1;
    j["spacing"] = pf.spacing == Spacing::UniformInS ? "uniform_s" : "uniform_t";
    return j;
}

} // namespace detail

inline void write_report_json(const std::string& path, const ProblemFile& pf,
                              const SolveReport& r) {
    nlohmann::ordered_json j;
    j["problem"] = detail::problem_json(pf);
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["gradient_norm"] = detail::checked(r.gradient_norm, "gradient_norm");
    if (r.z_b) j["z_b"] = detail::checked(*r.z_b, "z_b");
    if (r.multiplier) j["multiplier"] = detail::checked(*r.multiplier, "multiplier");
    if (r.multiplier_fn) {
        nlohmann::ordered_json lam = nlohmann::ordered_json::array();
        for (double v : r.multiplier_fn->values) lam.push_back(detail::checked(v, "multiplier_fn"));
        j["multiplier_fn"] = lam;
    }
    if (r.rho_opt) j["rho_opt"] = detail::checked(*r.rho_opt, "rho_opt");
    if (r.stationarity_integral)
        j["stationarity_integral"] =
            detail::checked(*r.stationarity_integral, "stationarity_integral");
    if (r.k_residual_norm)
        j["k_residual_norm"] = detail::checked(*r.k_residual_norm, "k_residual_norm");
    nlohmann::ordered_json flags;
    flags["sufficiency"] = r.sufficiency;
    flags["flat_objective"] = r.flat_objective;
    flags["boundary_optimum"] = r.boundary_optimum;
    j["flags"] = flags;
    j["diagnostics"] = detail::diagnostics_json(r.diagnostics);

    std::ofstream out(path);
    if (!out) throw SerializationError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

// check command: problem header + diagnostics only
inline void write_check_json(const std::string& path, const ProblemFile& pf,
                             const Diagnostics& d) {
    nlohmann::ordered_json j;
    j["problem"] = detail::problem_json(pf);
    j["diagnostics"] = detail::diagnostics_json(d);
    std::ofstream out(path);
    if (!out) throw SerializationError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

struct SweepRow {
    double param = 0;
    double J = 0;
    double el_residual_norm = 0;
    bool converged = false;
};

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw SerializationError("cannot open '" + path + "' for writing");
    out << "param,J,el_residual_norm,converged\n";
    for (const SweepRow& r : rows) {
        out << detail::fmt17(detail::checked(r.param, "param")) << ','
            << detail::fmt17(detail::checked(r.J, "J")) << ','
            << detail::fmt17(detail::checked(r.el_residual_norm, "el_residual_norm")) << ','
            << (r.converged ? 1 : 0) << "\n";
    }
}

} // namespace fracvar
