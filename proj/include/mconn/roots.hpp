#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "exactalg.hpp"

namespace mconn {

using cplx = std::complex<double>;

/// Numeric roots of a polynomial (companion eigenvalues, Newton polished).
/// Intended for squarefree inputs; repeated roots come back clustered.
inline std::vector<cplx> numeric_roots(const Poly& p)
{
    std::vector<cplx> out;
    if (p.degree() <= 0) return out;
    Poly m = p.monic();
    const int n = m.degree();
    std::vector<cplx> c = m.to_complex();
    if (n == 1) {
        out.push_back(-c[0]);
        return out;
    }
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[static_cast<std::size_t>(i)];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    Poly dm = m.derivative();
    for (int i = 0; i < n; ++i) {
        cplx z = es.eigenvalues()(i);
        for (int it = 0; it < 3; ++it) {
            cplx d = dm.eval(z);
            if (std::abs(d) == 0.0) break;
            cplx step = m.eval(z) / d;
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
            z -= step;
        }
        out.push_back(z);
    }
    return out;
}

/// Best rational approximation of x with denominator at most max_den.
inline mpq_class rationalize(double x, long max_den)
{
    long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double y = x;
    for (int it = 0; it < 64; ++it) {
        double a = std::floor(y);
        if (std::abs(a) > 1e15) break;
        long ai = static_cast<long>(a);
        long h2 = ai * h1 + h0;
        long k2 = ai * k1 + k0;
        if (k2 > max_den || k2 <= 0) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        double frac = y - a;
        if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) < 1e-13 * std::max(1.0, std::abs(x)) ||
            frac < 1e-15)
            break;
        y = 1.0 / frac;
    }
    if (k1 == 0) return mpq_class(0);
    return mpq_class(h1, k1);
}

/// Exact Gaussian-rational root recognised near z, verified by exact evaluation.
inline std::optional<GaussRat> recognise_root(const Poly& p, cplx z, long max_den = 1000000)
{
    GaussRat g(rationalize(z.real(), max_den), rationalize(z.imag(), max_den));
    if (std::abs(g.to_complex() - z) > 1e-6 * std::max(1.0, std::abs(z))) return std::nullopt;
    if (p.eval(g).is_zero()) return g;
    return std::nullopt;
}

struct RootSplit {
    std::vector<GaussRat> exact;  // Gaussian-rational roots (each once)
    std::vector<cplx> numeric;    // remaining roots, numeric only
};

/// Splits the roots of a squarefree polynomial into exactly recognised
/// Gaussian-rational ones and the numeric remainder. `hints` are tried first.
inline RootSplit split_roots(Poly p, std::span<const GaussRat> hints = {})
{
    RootSplit out;
    for (const auto& h : hints) {
        if (p.degree() <= 0) break;
        if (p.eval(h).is_zero()) {
            p.strip_root(h);
            out.exact.push_back(h);
        }
    }
    bool progress = true;
    while (progress && p.degree() > 0) {
        progress = false;
        for (cplx z : numeric_roots(p)) {
            if (auto g = recognise_root(p, z)) {
                p.strip_root(*g);
                out.exact.push_back(*g);
                progress = true;
                break;
            }
        }
    }
    if (p.degree() > 0) out.numeric = numeric_roots(p);
    return out;
}

} // namespace mconn
