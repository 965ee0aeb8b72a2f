#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fracvar/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fracvar - fractional variational problems with the "
                 "Caputo-Katugampola derivative"};
    app.require_subcommand(1);

    std::string file, outdir = ".", function_expr, param, solution_csv;
    double from = 0, to = 0, at_value = 0;
    long steps = 0;

    auto* deriv = app.add_subcommand(
        "deriv", "sample a function of t and apply the fractional derivative");
    deriv->add_option("file", file, "problem file")->required();
    deriv->add_option("--function", function_expr, "expression in t")->required();
    auto* at_opt = deriv->add_option("--at", at_value, "report the value nearest this t");
    deriv->add_option("--outdir", outdir, "output directory (default .)");

    auto* solve = app.add_subcommand("solve", "solve the variational problem");
    solve->add_option("file", file, "problem file")->required();
    solve->add_option("--outdir", outdir, "output directory (default .)");

    auto* sweep = app.add_subcommand("sweep", "re-solve while stepping alpha or rho");
    sweep->add_option("file", file, "problem file")->required();
    sweep->add_option("--param", param, "rho or alpha")->required();
    sweep->add_option("--from", from, "range start")->required();
    sweep->add_option("--to", to, "range end")->required();
    sweep->add_option("--steps", steps, "number of samples (>= 2)")->required();
    sweep->add_option("--outdir", outdir, "output directory (default .)");

    auto* check = app.add_subcommand("check", "recompute diagnostics for a stored solution");
    check->add_option("file", file, "problem file")->required();
    check->add_option("--solution", solution_csv, "solution.csv to check")->required();
    check->add_option("--outdir", outdir, "output directory (default .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : fracvar::cli::exit_validation;
    }

    if (deriv->parsed()) {
        std::optional<double> at;
        if (at_opt->count() > 0) at = at_value;
        return fracvar::cli::run_deriv(file, function_expr, at, outdir);
    }
    if (solve->parsed()) return fracvar::cli::run_solve(file, outdir);
    if (sweep->parsed()) return fracvar::cli::run_sweep(file, param, from, to, steps, outdir);
    if (check->parsed()) return fracvar::cli::run_check(file, solution_csv, outdir);
    return fracvar::cli::exit_validation;
}
