#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bundle.hpp"
#include "linalg.hpp"
#include "roots.hpp"

namespace mconn {

/// Unvalidated connection data. Column convention: the covariant derivative
/// of a coordinate vector r is r' + M r, so flat sections solve r' = -M r.
struct ConnectionSpec {
    SplittingType splitting;
    Divisor divisor;  // finite points only
    RatMat matrix;

    std::size_t rank() const { return splitting.rank(); }
};

struct ValidationReport {
    bool ok = true;
    bool empty_divisor = false;  // warning only
    std::vector<std::string> violations;

    std::string str() const
    {
        std::string s;
        for (const auto& v : violations) s += (s.empty() ? "" : "; ") + v;
        return s;
    }
};

namespace detail {

inline std::string entry_name(std::size_t i, std::size_t j)
{
    return "M[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]";
}

} // namespace detail

/// Gauge-transformed entry N_ki = M_ki t^(a_i - a_k) + (a_i/t) delta_ki of the
/// connection form in the frame f_i = t^(a_i) e_i adapted to infinity.
inline RatFun infinity_frame_entry(const ConnectionSpec& c, std::size_t k, std::size_t i)
{
    const auto& a = c.splitting.twists;
    RatFun n = c.matrix(k, i) * RatFun::t().pow(a[i] - a[k]);
    if (k == i && a[i] != 0) n += RatFun(GaussRat(a[i])) / RatFun::t();
    return n;
}

inline ValidationReport validate(const ConnectionSpec& c)
{
    ValidationReport rep;
    auto fail = [&](std::string msg) {
        rep.ok = false;
        rep.violations.push_back(std::move(msg));
    };
    const std::size_t n = c.rank();
    if (n == 0) fail("rank must be at least 1");
    if (c.matrix.rows() != n || c.matrix.cols() != n) {
        fail("matrix is " + std::to_string(c.matrix.rows()) + "x" + std::to_string(c.matrix.cols()) +
             ", rank is " + std::to_string(n));
        return rep;
    }
    if (c.divisor.infinity_order() > 0) fail("infinity may not be a pole of the connection");
    rep.empty_divisor = c.divisor.empty();
    const std::vector<GaussRat> support = c.divisor.finite_support();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const RatFun& m = c.matrix(i, j);
            if (m.is_zero()) continue;
            Poly rest = detail::residual_denominator(m, support);
            if (rest.degree() > 0)
                fail(detail::entry_name(i, j) + " has poles outside the divisor at " + detail::describe_points(rest));
            for (const auto& p : support) {
                int order = -valuation(m, p);
                int allowed = c.divisor.order_at(p);
                if (order > allowed)
                    fail(detail::entry_name(i, j) + " has a pole of order " + std::to_string(order) + " at " + p.str() +
                         " exceeding " + std::to_string(allowed));
            }
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            RatFun nk = infinity_frame_entry(c, k, i);
            if (nk.is_zero()) continue;
            int d = infinity_degree(nk);
            if (d > -2)
                fail("infinity: N[" + std::to_string(k + 1) + "][" + std::to_string(i + 1) + "] has degree " +
                     std::to_string(d) + " > -2 (entry " + detail::entry_name(k, i) + ")");
        }
    }
    return rep;
}

class InvalidConnection : public Error {
public:
    explicit InvalidConnection(ValidationReport rep)
        : Error(ErrorKind::InvalidConnection, rep.str()), report_(std::move(rep))
    {
    }
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

inline RatFun trace(const RatMat& m)
{
    RatFun t;
    for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
}

/// A validated meromorphic connection on O(a_1) + ... + O(a_k) over P^1,
/// holomorphic at infinity, with finite pole divisor D.
class Connection {
public:
    explicit Connection(ConnectionSpec spec) : spec_(std::move(spec))
    {
        ValidationReport rep = validate(spec_);
        if (!rep.ok) throw InvalidConnection(std::move(rep));
        empty_divisor_ = rep.empty_divisor;
        support_ = spec_.divisor.finite_support();
        // Residue theorem for tr M dt: holds for every connection that passes validate.
        GaussRat sum;
        RatFun tr = trace(spec_.matrix);
        for (const auto& c : support_) sum += residue(tr, c);
        if (sum != GaussRat(-chern(spec_.splitting)))
            throw std::logic_error("residue sum of tr M is " + sum.str() + ", expected -c(V)");
    }

    std::size_t rank() const { return spec_.rank(); }
    const SplittingType& splitting() const { return spec_.splitting; }
    const Divisor& divisor() const { return spec_.divisor; }
    const RatMat& matrix() const { return spec_.matrix; }
    const RatFun& entry(std::size_t i, std::size_t j) const { return spec_.matrix(i, j); }
    const ConnectionSpec& spec() const { return spec_; }
    /// Finite singular points C, in divisor order.
    const std::vector<GaussRat>& singular_points() const { return support_; }
    bool empty_divisor_warning() const { return empty_divisor_; }

    int pole_order_sum() const { return spec_.divisor.degree(); }

private:
    ConnectionSpec spec_;
    std::vector<GaussRat> support_;
    bool empty_divisor_ = false;
};

namespace detail {

inline Section covariant_derivative_unchecked(const Connection& conn, const Section& w)
{
    Section r{std::vector<RatFun>(conn.rank()), w.splitting};
    for (std::size_t i = 0; i < conn.rank(); ++i) {
        RatFun acc = w.comps[i].derivative();
        for (std::size_t j = 0; j < conn.rank(); ++j)
            if (!w.comps[j].is_zero() && !conn.entry(i, j).is_zero()) acc += conn.entry(i, j) * w.comps[j];
        r.comps[i] = std::move(acc);
    }
    return r;
}

inline void check_section(const Connection& conn, const Section& w)
{
    if (w.rank() != conn.rank() || !(w.splitting == conn.splitting()))
        throw Error(ErrorKind::InvalidArgument, "section does not live on the bundle of this connection");
    if (w.is_zero()) return;
    Poly outside(1);
    for (const auto& r : w.comps) {
        if (r.is_zero()) continue;
        Poly d = residual_denominator(r, conn.singular_points());
        if (d.degree() > 0) outside = outside * d;
    }
    if (outside.degree() > 0) throw Error(ErrorKind::PoleOutsideAllowedSet, "poles at " + describe_points(outside));
}

} // namespace detail

/// Covariant derivative along d/dt: w' + M w.
inline Section covariant_derivative(const Connection& conn, const Section& w)
{
    detail::check_section(conn, w);
    return detail::covariant_derivative_unchecked(conn, w);
}

/// Dual connection on V*: splitting (-a_i), matrix -M^T.
inline Connection dual_connection(const Connection& conn)
{
    ConnectionSpec s;
    for (int a : conn.splitting().twists) s.splitting.twists.push_back(-a);
    s.divisor = conn.divisor();
    s.matrix = conn.matrix().transpose();
    for (std::size_t i = 0; i < conn.rank(); ++i)
        for (std::size_t j = 0; j < conn.rank(); ++j) s.matrix(i, j) = -s.matrix(i, j);
    return Connection(std::move(s));
}

/// Induced connection on the top exterior power: splitting (c(V)), matrix tr M.
inline Connection det_connection(const Connection& conn)
{
    ConnectionSpec s;
    s.splitting.twists = {chern(conn.splitting())};
    s.divisor = conn.divisor();
    s.matrix = RatMat(1, 1, trace(conn.matrix()));
    return Connection(std::move(s));
}

/// Pairing <delta, w> = sum_i delta_i w_i in the standard and dual frames.
inline RatFun pairing(const std::vector<RatFun>& delta, const Section& w)
{
    RatFun acc;
    for (std::size_t i = 0; i < delta.size(); ++i) acc += delta[i] * w.comps[i];
    return acc;
}

struct LocalData {
    GaussRat point;
    std::vector<GaussMat> laurent;        // laurent[j-1] = coefficient of (t-c)^{-j}
    std::vector<cplx> exponents;          // eigenvalues of C_1, with multiplicity
    Poly residue_charpoly;                // det(x I - C_1), exact
    bool leading_vanishes = false;        // C_{m_c} = 0
};

/// Exact characteristic polynomial det(x I - A).
inline Poly characteristic_polynomial(const GaussMat& a)
{
    const std::size_t n = a.rows();
    Mat<Poly> m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j ? Poly::t() : Poly()) - Poly(a(i, j));
    return bareiss_determinant(std::move(m));
}

/// Roots of an exact polynomial with multiplicity; Gaussian-rational roots are exact.
inline std::vector<cplx> roots_with_multiplicity(const Poly& p)
{
    std::vector<cplx> out;
    if (p.degree() <= 0) return out;
    for (const auto& f : squarefree_decompose(p)) {
        RootSplit rs = split_roots(f.factor);
        for (int k = 0; k < f.multiplicity; ++k) {
            for (const auto& g : rs.exact) out.push_back(g.to_complex());
            for (const auto& z : rs.numeric) out.push_back(z);
        }
    }
    return out;
}

inline LocalData local_data(const Connection& conn, const GaussRat& c)
{
    const int m = conn.divisor().order_at(c);
    if (m == 0) throw Error(ErrorKind::NotASingularPoint, c.str() + " is not in the pole divisor");
    const std::size_t n = conn.rank();
    LocalData ld;
    ld.point = c;
    ld.laurent.assign(static_cast<std::size_t>(m), GaussMat(n, n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<GaussRat> co = laurent_coefficients(conn.entry(i, j), c, -m, m);
            // co[0] is (t-c)^{-m}, co[m-1] is (t-c)^{-1}
            for (int k = 1; k <= m; ++k) ld.laurent[static_cast<std::size_t>(k - 1)](i, j) = co[static_cast<std::size_t>(m - k)];
        }
    }
    const GaussMat& top = ld.laurent.back();
    ld.leading_vanishes = true;
    for (std::size_t i = 0; i < n && ld.leading_vanishes; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!top(i, j).is_zero()) {
                ld.leading_vanishes = false;
                break;
            }
    ld.residue_charpoly = characteristic_polynomial(ld.laurent.front());
    ld.exponents = roots_with_multiplicity(ld.residue_charpoly);
    return ld;
}

} // namespace mconn
