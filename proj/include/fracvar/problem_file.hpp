#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fracvar/errors.hpp"
#include "fracvar/problem.hpp"
#include "fracvar/solvers.hpp"

// INI-style problem files:
//
//   [problem]            kind, alpha, rho, a, b, n, spacing?, A (split only)
//   [lagrangian]         expr (quoted), m?, has_z?
//   [boundary]           left, right: "free" or comma-separated values
//   [constraint]         type, expr (quoted), l (isoperimetric only)
//   [herglotz]           z_a
//   [solver]             optional SolverConfig overrides
//   [params]             user constants, name = value
//
// '#' and ';' start comments outside quotes. Unknown sections or keys are
// rejected. Expressions are embedded as double-quoted strings.

namespace fracvar {

class ProblemFileError : public std::runtime_error {
public:
    ProblemFileError(int line_no, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
          line(line_no) {}
    explicit ProblemFileError(const std::string& msg)
        : std::runtime_error(msg), line(0) {}
    int line;
};

// Parsed file: grid and operator parameters always present; the variational
// problem itself only when the file carries [lagrangian] and [boundary]
// (derivative-only files may omit them).
struct ProblemFile {
    GridPtr grid;
    FracParams params{0.5, 1.0};
    std::string kind;
    Spacing spacing = Spacing::UniformInS;
    std::optional<Problem> problem;
    SolverConfig config;
    std::map<std::string, double> user_params;
};

namespace detail {

struct IniEntry {
    std::string value;
    int line;
    bool quoted;
    mutable bool used = false;
};
using IniSection = std::map<std::string, IniEntry>;
using IniDoc = std::map<std::string, IniSection>;

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline IniDoc parse_ini(std::istream& in) {
    IniDoc doc;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // strip comments outside quotes
        bool quote = false;
        std::string body;
        for (char c : line) {
            if (c == '"') quote = !quote;
            if (!quote && (c == '#' || c == ';')) break;
            body += c;
        }
        body = trim(body);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw ProblemFileError(line_no, "malformed section header");
            section = trim(body.substr(1, body.size() - 2));
            if (section.empty()) throw ProblemFileError(line_no, "empty section name");
            doc[section]; // may legitimately be empty
            continue;
        }
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ProblemFileError(line_no, "expected key = value");
        if (section.empty())
            throw ProblemFileError(line_no, "key outside of any section");
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        bool quoted = false;
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            quoted = true;
            value = value.substr(1, value.size() - 2);
        }
        if (key.empty()) throw ProblemFileError(line_no, "empty key");
        if (doc[section].count(key))
            throw ProblemFileError(line_no, "duplicate key '" + key + "'");
        doc[section][key] = IniEntry{value, line_no, quoted};
    }
    return doc;
}

inline double to_number(const IniEntry& e, const std::string& key) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw ProblemFileError(e.line, "value of '" + key + "' is not a number");
    return v;
}

inline long long to_integer(const IniEntry& e, const std::string& key) {
    const double v = to_number(e, key);
    if (v != static_cast<double>(static_cast<long long>(v)))
        throw ProblemFileError(e.line, "value of '" + key + "' is not an integer");
    return static_cast<long long>(v);
}

inline bool to_bool(const IniEntry& e, const std::string& key) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    throw ProblemFileError(e.line, "value of '" + key + "' must be true or false");
}

class SectionReader {
public:
    SectionReader(const IniDoc& doc, const std::string& name) : name_(name) {
        auto it = doc.find(name);
        sec_ = it == doc.end() ? nullptr : &it->second;
    }

    bool present() const { return sec_ != nullptr; }

    const IniEntry* find(const std::string& key) const {
        if (!sec_) return nullptr;
        auto it = sec_->find(key);
        if (it == sec_->end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    const IniEntry& require(const std::string& key) const {
        const IniEntry* e = find(key);
        if (!e)
            throw ProblemFileError("missing required key [" + name_ + "]." + key);
        return *e;
    }

    void reject_unused() const {
        if (!sec_) return;
        for (const auto& [k, v] : *sec_)
            if (!v.used)
                throw ProblemFileError(v.line, "unknown key '" + k + "' in [" + name_ + "]");
    }

private:
    std::string name_;
    const IniSection* sec_;
};

inline std::optional<std::vector<double>> parse_boundary(const IniEntry& e,
                                                         const std::string& key) {
    if (e.value == "free") return std::nullopt;
    std::vector<double> vals;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const char* s = item.c_str();
        char* end = nullptr;
        const double v = std::strtod(s, &end);
        if (end == s || *end != '\0')
            throw ProblemFileError(e.line, "'" + key + "' must be \"free\" or numbers");
        vals.push_back(v);
    }
    if (vals.empty())
        throw ProblemFileError(e.line, "'" + key + "' lists no values");
    return vals;
}

} // namespace detail

inline ProblemFile parse_problem_stream(std::istream& in) {
    using namespace detail;
    IniDoc doc = parse_ini(in);

    static const std::set<std::string> known_sections = {
        "problem", "lagrangian", "boundary", "constraint", "herglotz", "solver", "params"};
    for (const auto& [name, sec] : doc) {
        (void)sec;
        if (!known_sections.count(name))
            throw ProblemFileError("unknown section [" + name + "]");
    }

    ProblemFile pf;

    SectionReader prob(doc, "problem");
    if (!prob.present()) throw ProblemFileError("missing [problem] section");
    pf.kind = prob.require("kind").value;
    static const std::set<std::string> kinds = {"plain", "split", "isoperimetric",
                                                "holonomic", "herglotz"};
    if (!kinds.count(pf.kind))
        throw ProblemFileError(prob.require("kind").line,
                               "kind must be one of plain|split|isoperimetric|holonomic|herglotz");
    const double alpha = to_number(prob.require("alpha"), "alpha");
    const double rho = to_number(prob.require("rho"), "rho");
    const double a = to_number(prob.require("a"), "a");
    const double b = to_number(prob.require("b"), "b");
    const long long n = to_integer(prob.require("n"), "n");
    pf.spacing = Spacing::UniformInS;
    if (const IniEntry* sp = prob.find("spacing")) {
        if (sp->value == "uniform_s")
            pf.spacing = Spacing::UniformInS;
        else if (sp->value == "uniform_t")
            pf.spacing = Spacing::UniformInT;
        else
            throw ProblemFileError(sp->line, "spacing must be uniform_s or uniform_t");
    }
    std::optional<double> split_A;
    if (const IniEntry* eA = prob.find("A")) split_A = to_number(*eA, "A");

    try {
        pf.params = FracParams(alpha, rho);
        if (n < 2) throw DomainError("n must be >= 2");
        pf.grid = make_grid(a, b, static_cast<std::size_t>(n), rho, pf.spacing);
    } catch (const DomainError& e) {
        throw ProblemFileError(std::string("[problem]: ") + e.what());
    }

    SectionReader params_sec(doc, "params");
    if (params_sec.present()) {
        auto it = doc.find("params");
        for (const auto& [k, v] : it->second) {
            v.used = true;
            pf.user_params[k] = to_number(v, k);
        }
    }

    SectionReader solver(doc, "solver");
    if (const IniEntry* e = solver.find("max_iters"))
        pf.config.max_iters = static_cast<std::size_t>(to_integer(*e, "max_iters"));
    if (const IniEntry* e = solver.find("grad_tol")) pf.config.grad_tol = to_number(*e, "grad_tol");
    if (const IniEntry* e = solver.find("constraint_tol"))
        pf.config.constraint_tol = to_number(*e, "constraint_tol");
    if (const IniEntry* e = solver.find("fd_step")) pf.config.fd_step = to_number(*e, "fd_step");
    if (const IniEntry* e = solver.find("penalty_growth"))
        pf.config.penalty_growth = to_number(*e, "penalty_growth");
    if (const IniEntry* e = solver.find("seed"))
        pf.config.seed = static_cast<std::uint64_t>(to_integer(*e, "seed"));
    try {
        pf.config.validate();
    } catch (const DomainError& e) {
        throw ProblemFileError(std::string("[solver]: ") + e.what());
    }

    SectionReader lag_sec(doc, "lagrangian");
    SectionReader bnd(doc, "boundary");
    SectionReader cons(doc, "constraint");
    SectionReader herg(doc, "herglotz");

    if (lag_sec.present()) {
        const IniEntry& ee = lag_sec.require("expr");
        if (!ee.quoted)
            throw ProblemFileError(ee.line, "[lagrangian].expr must be a quoted string");
        std::size_t m = 1;
        if (const IniEntry* me = lag_sec.find("m"))
            m = static_cast<std::size_t>(to_integer(*me, "m"));
        bool has_z = false;
        if (const IniEntry* ze = lag_sec.find("has_z")) has_z = to_bool(*ze, "has_z");

        Lagrangian lag;
        try {
            lag = make_lagrangian(ee.value, m, has_z, pf.user_params);
        } catch (const std::exception& e) {
            throw ProblemFileError(ee.line, std::string("[lagrangian].expr: ") + e.what());
        }

        if (!bnd.present()) throw ProblemFileError("missing [boundary] section");
        BoundaryCondition left = parse_boundary(bnd.require("left"), "left");
        BoundaryCondition right = parse_boundary(bnd.require("right"), "right");

        ProblemKind kind = PlainKind{};
        if (pf.kind == "split") {
            if (!split_A) throw ProblemFileError("split problems require [problem].A");
            kind = SplitDomainKind{*split_A, 0};
        } else if (pf.kind == "isoperimetric") {
            if (!cons.present())
                throw ProblemFileError("isoperimetric problems require [constraint]");
            const IniEntry& te = cons.require("type");
            if (te.value != "isoperimetric")
                throw ProblemFileError(te.line, "[constraint].type must match the kind");
            const IniEntry& ge = cons.require("expr");
            if (!ge.quoted)
                throw ProblemFileError(ge.line, "[constraint].expr must be a quoted string");
            const double l = to_number(cons.require("l"), "l");
            Lagrangian g;
            try {
                g = make_lagrangian(ge.value, m, false, pf.user_params);
            } catch (const std::exception& e) {
                throw ProblemFileError(ge.line, std::string("[constraint].expr: ") + e.what());
            }
            kind = IsoperimetricKind{std::move(g), l};
        } else if (pf.kind == "holonomic") {
            if (!cons.present())
                throw ProblemFileError("holonomic problems require [constraint]");
            const IniEntry& te = cons.require("type");
            if (te.value != "holonomic")
                throw ProblemFileError(te.line, "[constraint].type must match the kind");
            const IniEntry& ge = cons.require("expr");
            if (!ge.quoted)
                throw ProblemFileError(ge.line, "[constraint].expr must be a quoted string");
            ExprPtr g;
            try {
                g = parse(ge.value);
            } catch (const std::exception& e) {
                throw ProblemFileError(ge.line, std::string("[constraint].expr: ") + e.what());
            }
            kind = HolonomicKind{std::move(g)};
        } else if (pf.kind == "herglotz") {
            if (!herg.present())
                throw ProblemFileError("herglotz problems require [herglotz].z_a");
            kind = HerglotzKind{to_number(herg.require("z_a"), "z_a")};
        }

        try {
            pf.problem = make_problem(std::move(lag), pf.params, pf.grid, std::move(left),
                                      std::move(right), std::move(kind));
        } catch (const std::exception& e) {
            throw ProblemFileError(std::string("invalid problem: ") + e.what());
        }
    } else if (pf.kind != "plain") {
        throw ProblemFileError("kind '" + pf.kind + "' requires a [lagrangian] section");
    }

    if (cons.present() && pf.kind != "isoperimetric" && pf.kind != "holonomic")
        throw ProblemFileError("[constraint] section is only valid for constrained kinds");
    if (herg.present() && pf.kind != "herglotz")
        throw ProblemFileError("[herglotz] section is only valid for herglotz problems");

    prob.reject_unused();
    lag_sec.reject_unused();
    bnd.reject_unused();
    cons.reject_unused();
    herg.reject_unused();
    solver.reject_unused();
    if (split_A && pf.kind != "split")
        throw ProblemFileError("[problem].A is only valid for split problems");

    return pf;
}

inline ProblemFile load_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProblemFileError("cannot open problem file '" + path + "'");
    return parse_problem_stream(in);
}

} // namespace fracvar
