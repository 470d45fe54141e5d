#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "ratfun.hpp"

namespace mconn {

struct SquarefreeFactor {
    Poly factor;  // monic, squarefree, nonconstant
    int multiplicity;

    friend bool operator==(const SquarefreeFactor&, const SquarefreeFactor&) = default;
};

/// Yun's algorithm. Factors are monic, pairwise coprime and squarefree;
/// the product of factor^multiplicity equals p up to its leading coefficient.
/// Sorted by decreasing multiplicity.
inline std::vector<SquarefreeFactor> squarefree_decompose(const Poly& p)
{
    if (p.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "squarefree decomposition of 0");
    std::vector<SquarefreeFactor> out;
    if (p.degree() == 0) return out;
    Poly f = p.monic();
    Poly df = f.derivative();
    Poly a = gcd(f, df);
    Poly b = exact_div(f, a);
    Poly c = exact_div(df, a);
    Poly d = c - b.derivative();
    for (int i = 1; b.degree() > 0; ++i) {
        Poly g = gcd(b, d);
        b = exact_div(b, g);
        c = exact_div(d, g);
        d = c - b.derivative();
        if (g.degree() > 0) out.push_back({g, i});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SquarefreeFactor& x, const SquarefreeFactor& y) { return x.multiplicity > y.multiplicity; });
    return out;
}

/// Order of r at t = c: positive for zeros, negative for poles.
inline int valuation(const RatFun& r, const GaussRat& c)
{
    if (r.is_zero()) throw Error(ErrorKind::ZeroFunction, "valuation of the zero function");
    Poly n = r.num();
    Poly d = r.den();
    return n.strip_root(c) - d.strip_root(c);
}

/// deg(num) - deg(den); positive means a pole at infinity.
inline int infinity_degree(const RatFun& r)
{
    if (r.is_zero()) throw Error(ErrorKind::ZeroFunction, "infinity degree of the zero function");
    return r.num().degree() - r.den().degree();
}

/// Laurent coefficients of r at c for (t-c)^k, k = lo .. lo+count-1.
inline std::vector<GaussRat> laurent_coefficients(const RatFun& r, const GaussRat& c, int lo, int count)
{
    std::vector<GaussRat> out(static_cast<std::size_t>(std::max(count, 0)));
    if (r.is_zero() || count <= 0) return out;
    Poly d = r.den();
    const int pole = d.strip_root(c);
    // r = N(s) / (s^pole * G(s)) with s = t - c and G(0) != 0.
    Poly ns = r.num().taylor_shift(c);
    Poly gs = d.taylor_shift(c);
    const int hi = lo + count - 1;
    const int need = hi + pole;  // highest series index of N/G required
    if (need < 0) return out;
    std::vector<GaussRat> q(static_cast<std::size_t>(need) + 1);
    const GaussRat g0inv = gs.coeff(0).inverse();
    for (int k = 0; k <= need; ++k) {
        GaussRat acc = ns.coeff(k);
        for (int j = 1; j <= std::min(k, gs.degree()); ++j) acc -= gs.coeff(j) * q[static_cast<std::size_t>(k - j)];
        q[static_cast<std::size_t>(k)] = acc * g0inv;
    }
    for (int k = lo; k <= hi; ++k) {
        int idx = k + pole;
        if (idx >= 0) out[static_cast<std::size_t>(k - lo)] = q[static_cast<std::size_t>(idx)];
    }
    return out;
}

/// Coefficient of (t-c)^{-1}; zero at regular points.
inline GaussRat residue(const RatFun& r, const GaussRat& c) { return laurent_coefficients(r, c, -1, 1)[0]; }

struct ZeroProfile {
    int max_multiplicity = 0;
    std::vector<SquarefreeFactor> factors;
};

/// Maximal zero multiplicity of r away from `excluded`, with the squarefree
/// profile of the numerator after every (t-c) with c excluded is divided out.
/// Excluded points are Gaussian rationals, so the removal is exact even when
/// they sit inside a nonlinear squarefree factor.
inline ZeroProfile max_zero_multiplicity(const RatFun& r, std::span<const GaussRat> excluded)
{
    if (r.is_zero()) throw Error(ErrorKind::ZeroFunction, "zero profile of the zero function");
    Poly n = r.num();
    for (const auto& c : excluded) n.strip_root(c);
    ZeroProfile out;
    out.factors = squarefree_decompose(n);
    for (const auto& f : out.factors) out.max_multiplicity = std::max(out.max_multiplicity, f.multiplicity);
    return out;
}

} // namespace mconn
