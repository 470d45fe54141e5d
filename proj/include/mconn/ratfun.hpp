#pragma once

#include <complex>
#include <string>
#include <utility>

#include "errors.hpp"
#include "poly.hpp"

namespace mconn {

/// Reduced fraction num/den over Q(i): den monic, gcd(num, den) = 1.
/// Zero is 0/1, so equality of RatFun is equality of canonical forms.
class RatFun {
public:
    RatFun() : den_(1) {}
    RatFun(const GaussRat& c) : num_(c), den_(1) {}  // NOLINT(google-explicit-constructor)
    RatFun(long c) : RatFun(GaussRat(c)) {}          // NOLINT(google-explicit-constructor)
    RatFun(Poly p) : num_(std::move(p)), den_(1) {}  // NOLINT(google-explicit-constructor)
    RatFun(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }

    static RatFun t() { return RatFun(Poly::t()); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.degree() == 0; }
    bool is_constant() const { return is_polynomial() && num_.is_constant(); }
    GaussRat constant_value() const { return num_.coeff(0); }

    RatFun operator-() const { return from_reduced(-num_, den_); }

    friend RatFun operator+(const RatFun& a, const RatFun& b)
    {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.den_ == b.den_) return RatFun(a.num_ + b.num_, a.den_);
        if (a.is_polynomial()) return from_reduced(a.num_ * b.den_ + b.num_, b.den_);
        if (b.is_polynomial()) return from_reduced(a.num_ + b.num_ * a.den_, a.den_);
        Poly g = gcd(a.den_, b.den_);
        if (g.degree() == 0) return from_reduced(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
        Poly bd = exact_div(b.den_, g);
        Poly ad = exact_div(a.den_, g);
        return RatFun(a.num_ * bd + b.num_ * ad, a.den_ * bd);
    }
    friend RatFun operator-(const RatFun& a, const RatFun& b) { return a + (-b); }

    friend RatFun operator*(const RatFun& a, const RatFun& b)
    {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.is_polynomial() && b.is_polynomial()) return RatFun(a.num_ * b.num_);
        Poly g1 = gcd(a.num_, b.den_);
        Poly g2 = gcd(b.num_, a.den_);
        Poly n = exact_div(a.num_, g1) * exact_div(b.num_, g2);
        Poly d = exact_div(a.den_, g2) * exact_div(b.den_, g1);
        return from_reduced(std::move(n), std::move(d));
    }
    friend RatFun operator/(const RatFun& a, const RatFun& b) { return a * b.inverse(); }

    RatFun& operator+=(const RatFun& o) { return *this = *this + o; }
    RatFun& operator-=(const RatFun& o) { return *this = *this - o; }
    RatFun& operator*=(const RatFun& o) { return *this = *this * o; }
    RatFun& operator/=(const RatFun& o) { return *this = *this / o; }

    friend bool operator==(const RatFun& a, const RatFun& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator!=(const RatFun& a, const RatFun& b) { return !(a == b); }

    RatFun inverse() const
    {
        if (is_zero()) throw Error(ErrorKind::ZeroFunction, "inverse of the zero function");
        return from_reduced(den_, num_);
    }

    RatFun pow(int e) const
    {
        if (e < 0) return inverse().pow(-e);
        return from_reduced(num_.pow(e), den_.pow(e));
    }

    RatFun derivative() const
    {
        if (is_polynomial()) return RatFun(num_.derivative());
        return RatFun(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
    }

    /// Exact value at a point; throws SingularEvaluationPoint at a pole.
    GaussRat eval(const GaussRat& x) const
    {
        GaussRat d = den_.eval(x);
        if (d.is_zero()) throw Error(ErrorKind::SingularEvaluationPoint, "pole at t = " + x.str());
        return num_.eval(x) / d;
    }

    std::complex<double> eval(std::complex<double> x) const { return num_.eval(x) / den_.eval(x); }

    std::string str() const
    {
        if (is_polynomial()) return num_.str();
        return "(" + num_.str() + ")/(" + den_.str() + ")";
    }

private:
    static RatFun from_reduced(Poly n, Poly d)
    {
        RatFun r;
        if (n.is_zero()) return r;
        if (!d.is_monic()) {
            GaussRat inv = d.lead().inverse();
            n = n * inv;
            d = d * inv;
        }
        r.num_ = std::move(n);
        r.den_ = std::move(d);
        return r;
    }

    void normalize()
    {
        if (den_.is_zero()) throw Error(ErrorKind::ZeroFunction, "zero denominator");
        if (num_.is_zero()) {
            den_ = Poly(1);
            return;
        }
        if (den_.degree() > 0) {
            Poly g = gcd(num_, den_);
            if (g.degree() > 0) {
                num_ = exact_div(num_, g);
                den_ = exact_div(den_, g);
            }
        }
        *this = from_reduced(std::move(num_), std::move(den_));
    }

    Poly num_;
    Poly den_;
};

} // namespace mconn
