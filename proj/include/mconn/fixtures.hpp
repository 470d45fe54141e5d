#pragma once

#include <string>
#include <vector>

#include "connection.hpp"

namespace mconn::fixtures {

inline RatFun q(long num, long den = 1) { return RatFun(GaussRat::fraction(num, den)); }

/// sum_k K_k / (t - c_k) for constant residue matrices.
inline RatMat fuchsian_matrix(const std::vector<GaussMat>& residues, const std::vector<GaussRat>& points)
{
    const std::size_t n = residues.front().rows();
    RatMat m(n, n);
    for (std::size_t k = 0; k < residues.size(); ++k) {
        RatFun pole = RatFun(Poly(1), Poly::linear(points[k]));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (!residues[k](i, j).is_zero()) m(i, j) += RatFun(residues[k](i, j)) * pole;
    }
    return m;
}

inline GaussMat mat2(GaussRat a, GaussRat b, GaussRat c, GaussRat d)
{
    GaussMat m(2, 2);
    m(0, 0) = std::move(a);
    m(0, 1) = std::move(b);
    m(1, 0) = std::move(c);
    m(1, 1) = std::move(d);
    return m;
}

inline GaussMat negated_sum(const GaussMat& a, const GaussMat& b)
{
    GaussMat r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = -(a(i, j) + b(i, j));
    return r;
}

inline Divisor simple_poles(const std::vector<GaussRat>& pts)
{
    std::vector<Divisor::Entry> e;
    for (const auto& p : pts) e.push_back({Point(p), 1});
    return Divisor(std::move(e));
}

/// Rank 1, M = 1/(2t(t-1)); flat sections are multiples of t^(1/2) (t-1)^(-1/2).
inline ConnectionSpec euler_half()
{
    ConnectionSpec s;
    s.splitting.twists = {0};
    s.divisor = simple_poles({0, 1});
    s.matrix = RatMat(1, 1, RatFun(Poly(GaussRat::fraction(1, 2)), Poly::t() * Poly::linear(1)));
    return s;
}

/// Rank 2 on {0,1,2}: K0 = [[0,1],[0,0]], K1 = [[0,0],[1/4,0]], K2 = -K0-K1.
inline ConnectionSpec triangle_nilpotent()
{
    GaussMat k0 = mat2(0, 1, 0, 0);
    GaussMat k1 = mat2(0, 0, GaussRat::fraction(1, 4), 0);
    GaussMat k2 = negated_sum(k0, k1);
    ConnectionSpec s;
    s.splitting.twists = {0, 0};
    s.divisor = simple_poles({0, 1, 2});
    s.matrix = fuchsian_matrix({k0, k1, k2}, {0, 1, 2});
    return s;
}

/// Rank 2 on {0,1,2}: K0 = diag(1/4,-1/4), K1 = (5/32)[[1,1],[-1,-1]] (nilpotent),
/// K2 = -K0-K1 with exponents +-3/8. No choice of one exponent per point sums to
/// an integer, so no rank-one sub-connection exists.
inline ConnectionSpec triangle_diag()
{
    GaussMat k0 = mat2(GaussRat::fraction(1, 4), 0, 0, GaussRat::fraction(-1, 4));
    GaussRat f = GaussRat::fraction(5, 32);
    GaussMat k1 = mat2(f, f, -f, -f);
    GaussMat k2 = negated_sum(k0, k1);
    ConnectionSpec s;
    s.splitting.twists = {0, 0};
    s.divisor = simple_poles({0, 1, 2});
    s.matrix = fuchsian_matrix({k0, k1, k2}, {0, 1, 2});
    return s;
}

/// Rank 2, M = K/(t(t-1)) with K = [[0,1],[1/4,0]]: two singular points, so the
/// monodromy group is cyclic and reducible.
inline ConnectionSpec two_point_reducible()
{
    ConnectionSpec s;
    s.splitting.twists = {0, 0};
    s.divisor = simple_poles({0, 1});
    RatFun inv(Poly(1), Poly::t() * Poly::linear(1));
    s.matrix = RatMat(2, 2);
    s.matrix(0, 1) = inv;
    s.matrix(1, 0) = q(1, 4) * inv;
    return s;
}

inline const std::vector<std::string>& names()
{
    static const std::vector<std::string> n{"euler-half", "triangle-nilpotent", "triangle-diag", "two-point-reducible"};
    return n;
}

inline ConnectionSpec by_name(const std::string& name)
{
    if (name == "euler-half") return euler_half();
    if (name == "triangle-nilpotent") return triangle_nilpotent();
    if (name == "triangle-diag") return triangle_diag();
    if (name == "two-point-reducible") return two_point_reducible();
    throw Error(ErrorKind::InvalidArgument, "unknown fixture '" + name + "'");
}

inline std::string description(const std::string& name)
{
    if (name == "euler-half") return "rank 1, M = 1/(2t(t-1)), C = {0,1}";
    if (name == "triangle-nilpotent") return "rank 2, M = K0/t + K1/(t-1) + K2/(t-2), K0 = [[0,1],[0,0]], K1 = [[0,0],[1/4,0]]";
    if (name == "triangle-diag") return "rank 2, M = K0/t + K1/(t-1) + K2/(t-2), K0 = diag(1/4,-1/4), K1 = (5/32)[[1,1],[-1,-1]]";
    if (name == "two-point-reducible") return "rank 2, M = K/(t(t-1)), K = [[0,1],[1/4,0]]";
    return {};
}

} // namespace mconn::fixtures
