#pragma once

// Test-only oracles, kept independent of the library's operator
// implementations: adaptive quadrature with singularity absorption, a
// standalone classical Caputo L1 routine, finite differences, Nelder-Mead
// and a dense pivoted solver for KKT cross-checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracles {

template <class F>
double adaptive_simpson_rec(F&& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = (left + right - whole) / 15.0;
    if (depth <= 0 || std::abs(err) <= tol) return left + right + err;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// int_0^U u^(p-1) g(u) du with p in (0,2); the substitution u = v^(1/p)
// absorbs the endpoint singularity exactly.
template <class G>
double singular_power_quad(G&& g, double U, double p, double tol = 1e-12) {
    if (U <= 0.0) return 0.0;
    const double V = std::pow(U, p);
    auto h = [&](double v) { return g(std::pow(v, 1.0 / p)); };
    return adaptive_simpson(h, 0.0, V, tol) / p;
}

// cD_{a+}^{alpha,rho} x(t) by high-precision quadrature of the singular
// integral, given x' analytically. Works in sigma = tau^rho.
inline double ck_deriv_quad(const std::function<double(double)>& xprime, double a,
                            double t, double alpha, double rho, double tol = 1e-12) {
    const double s = std::pow(t, rho), sa = std::pow(a, rho);
    auto g = [&](double u) {
        const double sigma = s - u;
        const double tau = std::pow(sigma, 1.0 / rho);
        // y'(sigma) = x'(tau) tau^(1-rho) / rho
        return xprime(tau) * std::pow(tau, 1.0 - rho) / rho;
    };
    const double integral = singular_power_quad(g, s - sa, 1.0 - alpha, tol);
    return std::pow(rho, alpha) / std::tgamma(1.0 - alpha) * integral;
}

// I_{b-}^{q,rho} x(t) by high-precision quadrature (right-sided kernel has
// no tau^(rho-1) weight).
inline double right_integral_quad(const std::function<double(double)>& x, double b,
                                  double t, double q, double rho, double tol = 1e-12) {
    const double s = std::pow(t, rho), sb = std::pow(b, rho);
    auto g = [&](double u) {
        const double sigma = s + u;
        const double tau = std::pow(sigma, 1.0 / rho);
        return x(tau) * std::pow(sigma, 1.0 / rho - 1.0);
    };
    const double integral = singular_power_quad(g, sb - s, q, tol);
    return std::pow(rho, -q) / std::tgamma(q) * integral;
}

// Independent classical Caputo L1 (rho = 1): explicit per-interval kernel
// moments straight from the node coordinates.
inline std::vector<double> classical_caputo_l1(std::span<const double> x,
                                               std::span<const double> t, double alpha) {
    const std::size_t n = t.size() - 1;
    std::vector<double> out(n + 1, 0.0);
    const double c = 1.0 / (std::tgamma(1.0 - alpha) * (1.0 - alpha));
    for (std::size_t k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double slope = (x[j + 1] - x[j]) / (t[j + 1] - t[j]);
            acc += slope * (std::pow(t[k] - t[j], 1.0 - alpha) -
                            std::pow(t[k] - t[j + 1], 1.0 - alpha));
        }
        out[k] = c * acc;
    }
    return out;
}

template <class F>
double central_diff(F&& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Standard Nelder-Mead; deterministic for a fixed start simplex.
inline std::vector<double> nelder_mead(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x0, double scale,
                                       std::size_t max_iters = 20000, double ftol = 1e-13) {
    const std::size_t n = x0.size();
    if (n == 0) return x0;
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += scale;
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    for (std::size_t it = 0; it < max_iters; ++it) {
        // order
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> snew(n + 1);
        std::vector<double> fnew(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            snew[i] = simplex[idx[i]];
            fnew[i] = fv[idx[i]];
        }
        simplex.swap(snew);
        fv.swap(fnew);
        if (std::abs(fv[n] - fv[0]) <= ftol * (1.0 + std::abs(fv[0]))) break;

        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += simplex[i][j];
            centroid[j] = acc / n;
        }
        for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + (centroid[j] - simplex[n][j]);
        const double fr = f(xr);
        if (fr < fv[0]) {
            for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[n][j]);
            const double fe = f(xe);
            if (fe < fr) {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            for (std::size_t j = 0; j < n; ++j) xc[j] = centroid[j] + 0.5 * (simplex[n][j] - centroid[j]);
            const double fc = f(xc);
            if (fc < fv[n]) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    fv[i] = f(simplex[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fv[i] < fv[best]) best = i;
    return simplex[best];
}

// best of several seeded random starts
inline double nelder_mead_multistart(const std::function<double(std::span<const double>)>& f,
                                     const std::vector<double>& x0, double radius,
                                     int starts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    double best = f(x0);
    {
        std::vector<double> xs = nelder_mead(f, x0, 0.25 * radius + 1e-3);
        best = std::min(best, f(xs));
    }
    for (int s = 0; s < starts; ++s) {
        std::vector<double> xi = x0;
        for (double& v : xi) v += u(rng);
        std::vector<double> xs = nelder_mead(f, xi, 0.25 * radius + 1e-3);
        best = std::min(best, f(xs));
    }
    return best;
}

// dense Ax = b via partial-pivoted Gaussian elimination (KKT oracle)
inline std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b) {
    const std::size_t n = b.size();
    if (A.size() != n * n) throw std::invalid_argument("solve_dense: bad shape");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
        if (std::abs(A[piv * n + col]) < 1e-14)
            throw std::runtime_error("solve_dense: singular matrix");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r * n + col] / A[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= A[i * n + c] * x[c];
        x[i] = acc / A[i * n + i];
    }
    return x;
}

} // namespace oracles
