#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "exactalg.hpp"
#include "expr.hpp"
#include "roots.hpp"

namespace mconn {

/// Twists a_1..a_k of V = O(a_1 inf) + ... + O(a_k inf).
struct SplittingType {
    std::vector<int> twists;

    std::size_t rank() const { return twists.size(); }
    friend bool operator==(const SplittingType&, const SplittingType&) = default;
};

/// c(V) = sum of the twists.
inline int chern(const SplittingType& s) { return std::accumulate(s.twists.begin(), s.twists.end(), 0); }

/// A point of P^1: a Gaussian rational or infinity.
class Point {
public:
    Point() = default;
    Point(GaussRat v) : value_(std::move(v)) {}  // NOLINT(google-explicit-constructor)
    Point(long v) : value_(GaussRat(v)) {}       // NOLINT(google-explicit-constructor)
    static Point infinity() { return Point(std::nullopt); }

    bool is_infinity() const { return !value_.has_value(); }
    const GaussRat& value() const { return *value_; }

    std::string str() const { return is_infinity() ? "inf" : value_->str(); }
    friend bool operator==(const Point&, const Point&) = default;

private:
    explicit Point(std::nullopt_t) : value_(std::nullopt) {}
    std::optional<GaussRat> value_{GaussRat(0)};
};

/// Effective divisor sum k_p * p with pairwise distinct points and k_p >= 1.
class Divisor {
public:
    struct Entry {
        Point point;
        int order;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    Divisor() = default;
    explicit Divisor(std::vector<Entry> entries) : entries_(std::move(entries))
    {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (entries_[i].order < 1)
                throw Error(ErrorKind::InvalidArgument, "divisor order at " + entries_[i].point.str() + " must be >= 1");
            for (std::size_t j = 0; j < i; ++j)
                if (entries_[j].point == entries_[i].point)
                    throw Error(ErrorKind::InvalidArgument, "duplicate divisor point " + entries_[i].point.str());
        }
    }

    static Divisor at_infinity(int n)
    {
        if (n <= 0) return {};
        return Divisor({{Point::infinity(), n}});
    }

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    int degree() const
    {
        int d = 0;
        for (const auto& e : entries_) d += e.order;
        return d;
    }

    int infinity_order() const
    {
        for (const auto& e : entries_)
            if (e.point.is_infinity()) return e.order;
        return 0;
    }

    std::vector<GaussRat> finite_support() const
    {
        std::vector<GaussRat> s;
        for (const auto& e : entries_)
            if (!e.point.is_infinity()) s.push_back(e.point.value());
        return s;
    }

    /// Order at a finite point (0 when absent).
    int order_at(const GaussRat& c) const
    {
        for (const auto& e : entries_)
            if (!e.point.is_infinity() && e.point.value() == c) return e.order;
        return 0;
    }

    /// Text form "0^1,1^1,inf^2".
    std::string str() const
    {
        std::string s;
        for (const auto& e : entries_) {
            if (!s.empty()) s += ",";
            s += e.point.str() + "^" + std::to_string(e.order);
        }
        return s;
    }

    friend bool operator==(const Divisor&, const Divisor&) = default;

private:
    std::vector<Entry> entries_;
};

/// Parses "point^order" items separated by commas; `inf` is infinity.
/// An item without "^order" has order 1. The empty string is the zero divisor.
inline Divisor parse_divisor(std::string_view text)
{
    std::vector<Divisor::Entry> entries;
    std::size_t pos = 0;
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    if (trim(text).empty()) return {};
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        std::string_view item = trim(text.substr(pos, comma - pos));
        const int col = static_cast<int>(pos) + 1;
        if (item.empty()) throw ParseError(1, col, "empty divisor item");
        std::size_t caret = item.rfind('^');
        std::string_view pt = trim(caret == std::string_view::npos ? item : item.substr(0, caret));
        int order = 1;
        if (caret != std::string_view::npos) {
            std::string_view os = trim(item.substr(caret + 1));
            if (os.empty() || !std::all_of(os.begin(), os.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                throw ParseError(1, col, "divisor order must be a positive integer");
            order = std::stoi(std::string(os));
            if (order < 1) throw ParseError(1, col, "divisor order must be a positive integer");
        }
        Point p = (pt == "inf") ? Point::infinity() : Point(parse_gauss(pt, 1, col));
        for (const auto& e : entries)
            if (e.point == p) throw ParseError(1, col, "duplicate divisor point " + p.str());
        entries.push_back({p, order});
        pos = comma + 1;
    }
    return Divisor(std::move(entries));
}

/// Meromorphic section of V in the standard affine frame e_1..e_k.
struct Section {
    std::vector<RatFun> comps;
    SplittingType splitting;

    std::size_t rank() const { return comps.size(); }
    bool is_zero() const
    {
        return std::all_of(comps.begin(), comps.end(), [](const RatFun& r) { return r.is_zero(); });
    }
    friend bool operator==(const Section&, const Section&) = default;
};

inline Section operator+(const Section& a, const Section& b)
{
    Section r = a;
    for (std::size_t i = 0; i < r.comps.size(); ++i) r.comps[i] += b.comps[i];
    return r;
}

inline Section operator*(const RatFun& f, const Section& s)
{
    Section r = s;
    for (auto& c : r.comps) c *= f;
    return r;
}

struct PoleProfile {
    std::vector<std::pair<GaussRat, int>> finite;  // only points with positive pole order
    int infinity_order = 0;                        // negative: zero of that order at infinity
    int degree = 0;
};

namespace detail {

/// Denominator left after removing all roots in `allowed`.
inline Poly residual_denominator(const RatFun& r, std::span<const GaussRat> allowed)
{
    Poly d = r.den();
    for (const auto& c : allowed) d.strip_root(c);
    return d;
}

inline std::string describe_points(const Poly& d)
{
    std::ostringstream os;
    bool first = true;
    for (const auto& f : squarefree_decompose(d)) {
        RootSplit rs = split_roots(f.factor);
        for (const auto& g : rs.exact) {
            os << (first ? "" : ", ") << g.str();
            first = false;
        }
        for (const auto& z : rs.numeric) {
            os << (first ? "" : ", ") << "~(" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i)";
            first = false;
        }
    }
    return os.str();
}

} // namespace detail

/// Pole orders of a section at finite points of C and (twist-aware) at infinity.
/// Degree is the sum of finite pole orders plus the pole order at infinity if positive.
inline PoleProfile pole_profile(const Section& w, std::span<const GaussRat> allowed)
{
    if (w.is_zero()) throw Error(ErrorKind::ZeroSection, "pole profile of the zero section");
    if (w.comps.size() != w.splitting.rank()) throw Error(ErrorKind::InvalidArgument, "section rank does not match its splitting");
    PoleProfile out;
    Poly outside(1);
    for (const auto& r : w.comps) {
        if (r.is_zero()) continue;
        Poly d = detail::residual_denominator(r, allowed);
        if (d.degree() > 0) outside = outside * d;
    }
    if (outside.degree() > 0)
        throw Error(ErrorKind::PoleOutsideAllowedSet, "poles at " + detail::describe_points(outside));
    for (const auto& c : allowed) {
        int order = 0;
        for (const auto& r : w.comps)
            if (!r.is_zero()) order = std::max(order, -valuation(r, c));
        if (order > 0) {
            out.finite.emplace_back(c, order);
            out.degree += order;
        }
    }
    bool first = true;
    for (std::size_t i = 0; i < w.comps.size(); ++i) {
        if (w.comps[i].is_zero()) continue;
        int o = infinity_degree(w.comps[i]) - w.splitting.twists[i];
        out.infinity_order = first ? o : std::max(out.infinity_order, o);
        first = false;
    }
    out.degree += std::max(0, out.infinity_order);
    return out;
}

/// Basis of H^0(V (x) O(E)): for summand i, the sections F^{-1} t^j e_i with
/// F = prod over finite (c,k) in E of (t-c)^k and 0 <= j < a_i + deg E + 1.
inline std::vector<Section> section_space_basis(const SplittingType& s, const Divisor& e)
{
    Poly f(1);
    for (const auto& entry : e.entries())
        if (!entry.point.is_infinity()) f = f * Poly::linear(entry.point.value()).pow(entry.order);
    const int deg = e.degree();
    std::vector<Section> out;
    for (std::size_t i = 0; i < s.rank(); ++i) {
        const int d = std::max(0, s.twists[i] + deg + 1);
        for (int j = 0; j < d; ++j) {
            Section w{std::vector<RatFun>(s.rank()), s};
            w.comps[i] = RatFun(Poly::monomial(GaussRat(1), j), f);
            out.push_back(std::move(w));
        }
    }
    return out;
}

} // namespace mconn
