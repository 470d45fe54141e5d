#pragma once

#include <algorithm>
#include <complex>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "gauss_rat.hpp"

namespace mconn {

/// Dense univariate polynomial in t over Q(i), lowest degree first.
/// The zero polynomial has an empty coefficient list.
class Poly {
public:
    Poly() = default;
    Poly(const GaussRat& c)  // NOLINT(google-explicit-constructor)
    {
        if (!c.is_zero()) coeffs_.push_back(c);
    }
    Poly(long c) : Poly(GaussRat(c)) {}  // NOLINT(google-explicit-constructor)
    explicit Poly(std::vector<GaussRat> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
    Poly(std::initializer_list<GaussRat> coeffs) : coeffs_(coeffs) { trim(); }

    /// The monomial t.
    static Poly t() { return Poly({GaussRat(0), GaussRat(1)}); }
    /// t - c
    static Poly linear(const GaussRat& c) { return Poly({-c, GaussRat(1)}); }
    static Poly monomial(const GaussRat& c, int deg)
    {
        if (c.is_zero()) return {};
        std::vector<GaussRat> v(static_cast<std::size_t>(deg) + 1);
        v.back() = c;
        return Poly(std::move(v));
    }

    const std::vector<GaussRat>& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }
    bool is_constant() const { return coeffs_.size() <= 1; }
    /// Degree; -1 for the zero polynomial.
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const GaussRat& lead() const { return coeffs_.back(); }

    GaussRat coeff(int k) const
    {
        if (k < 0 || k > degree()) return GaussRat(0);
        return coeffs_[static_cast<std::size_t>(k)];
    }

    bool is_monic() const { return !is_zero() && lead().is_one(); }

    Poly monic() const
    {
        if (is_zero() || lead().is_one()) return *this;
        GaussRat inv = lead().inverse();
        Poly r = *this;
        for (auto& c : r.coeffs_) c *= inv;
        return r;
    }

    GaussRat eval(const GaussRat& x) const
    {
        GaussRat acc;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc *= x;
            acc += *it;
        }
        return acc;
    }

    std::complex<double> eval(std::complex<double> x) const
    {
        std::complex<double> acc = 0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + it->to_complex();
        return acc;
    }

    Poly derivative() const
    {
        if (coeffs_.size() <= 1) return {};
        std::vector<GaussRat> d(coeffs_.size() - 1);
        for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * GaussRat(static_cast<long>(k));
        return Poly(std::move(d));
    }

    /// Coefficients of p(c + s) as a polynomial in s.
    Poly taylor_shift(const GaussRat& c) const
    {
        std::vector<GaussRat> a = coeffs_;
        if (c.is_zero()) return *this;
        const std::size_t n = a.size();
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = n - 1; j > i; --j) a[j - 1] += c * a[j];
        return Poly(std::move(a));
    }

    Poly operator-() const
    {
        Poly r = *this;
        for (auto& c : r.coeffs_) c = -c;
        return r;
    }

    Poly& operator+=(const Poly& o)
    {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
        for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
        trim();
        return *this;
    }
    Poly& operator-=(const Poly& o)
    {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
        for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
        trim();
        return *this;
    }
    Poly& operator*=(const Poly& o)
    {
        *this = *this * o;
        return *this;
    }

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b)
    {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<GaussRat> r(a.coeffs_.size() + b.coeffs_.size() - 1);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
            if (a.coeffs_[i].is_zero()) continue;
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) r[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
        return Poly(std::move(r));
    }
    friend Poly operator*(Poly a, const GaussRat& s)
    {
        if (s.is_zero()) return {};
        for (auto& c : a.coeffs_) c *= s;
        return a;
    }

    friend bool operator==(const Poly& a, const Poly& b) { return a.coeffs_ == b.coeffs_; }
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

    /// Euclidean division; returns (quotient, remainder).
    friend std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b)
    {
        if (b.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "division by the zero polynomial");
        if (a.degree() < b.degree()) return {Poly{}, a};
        std::vector<GaussRat> rem = a.coeffs_;
        const int db = b.degree();
        std::vector<GaussRat> q(static_cast<std::size_t>(a.degree() - db + 1));
        const GaussRat inv = b.lead().inverse();
        const bool unit = b.lead().is_one();
        for (int k = a.degree() - db; k >= 0; --k) {
            GaussRat c = rem[static_cast<std::size_t>(k + db)];
            if (c.is_zero()) continue;
            if (!unit) c *= inv;
            for (int j = 0; j <= db; ++j)
                rem[static_cast<std::size_t>(k + j)] -= c * b.coeffs_[static_cast<std::size_t>(j)];
            q[static_cast<std::size_t>(k)] = std::move(c);
        }
        rem.resize(static_cast<std::size_t>(db));
        return {Poly(std::move(q)), Poly(std::move(rem))};
    }

    /// Quotient of a division known to be exact.
    friend Poly exact_div(const Poly& a, const Poly& b) { return divmod(a, b).first; }

    friend Poly gcd(Poly a, Poly b)
    {
        while (!b.is_zero()) {
            Poly r = divmod(a, b).second;
            a = std::move(b);
            b = r.monic();
        }
        return a.monic();
    }

    Poly pow(int e) const
    {
        Poly r(1);
        Poly base = *this;
        while (e > 0) {
            if (e & 1) r = r * base;
            e >>= 1;
            if (e) base = base * base;
        }
        return r;
    }

    /// Divides out (t - c) as often as possible; returns the multiplicity removed.
    int strip_root(const GaussRat& c)
    {
        int k = 0;
        while (!is_zero() && eval(c).is_zero()) {
            *this = exact_div(*this, linear(c));
            ++k;
        }
        return k;
    }

    std::vector<std::complex<double>> to_complex() const
    {
        std::vector<std::complex<double>> v;
        v.reserve(coeffs_.size());
        for (const auto& c : coeffs_) v.push_back(c.to_complex());
        return v;
    }

    std::string str(const std::string& var = "t") const
    {
        if (is_zero()) return "0";
        std::string out;
        for (int k = degree(); k >= 0; --k) {
            const GaussRat& c = coeffs_[static_cast<std::size_t>(k)];
            if (c.is_zero()) continue;
            std::string cs = c.str();
            bool compound = !c.is_real() && sgn(c.re()) != 0;
            bool neg = !compound && cs[0] == '-';
            if (neg) cs = cs.substr(1);
            if (compound) cs = "(" + cs + ")";
            if (!out.empty())
                out += neg ? " - " : " + ";
            else if (neg)
                out += "-";
            if (k == 0) {
                out += cs;
                continue;
            }
            if (cs != "1") out += cs + "*";
            out += var;
            if (k > 1) out += "^" + std::to_string(k);
        }
        return out;
    }

private:
    void trim()
    {
        while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
    }

    std::vector<GaussRat> coeffs_;
};

} // namespace mconn
