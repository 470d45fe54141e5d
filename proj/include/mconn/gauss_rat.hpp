#pragma once

#include <complex>
#include <ostream>
#include <string>

#include <gmpxx.h>

#include "errors.hpp"

namespace mconn {

/// Element of Q(i), stored as two canonical GMP rationals.
class GaussRat {
public:
    GaussRat() = default;
    GaussRat(long v) : re_(v) {}  // NOLINT(google-explicit-constructor)
    GaussRat(mpq_class re, mpq_class im = 0) : re_(std::move(re)), im_(std::move(im))
    {
        re_.canonicalize();
        im_.canonicalize();
    }

    static GaussRat i() { return GaussRat(0, 1); }
    static GaussRat fraction(long num, long den, long inum = 0, long iden = 1)
    {
        return GaussRat(mpq_class(num, den), mpq_class(inum, iden));
    }

    const mpq_class& re() const { return re_; }
    const mpq_class& im() const { return im_; }

    bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
    bool is_one() const { return re_ == 1 && sgn(im_) == 0; }
    bool is_real() const { return sgn(im_) == 0; }
    bool is_integer() const { return is_real() && re_.get_den() == 1; }

    GaussRat conj() const { return GaussRat(re_, -im_); }
    mpq_class norm() const { return re_ * re_ + im_ * im_; }

    GaussRat inverse() const
    {
        mpq_class n = norm();
        if (n == 0) throw Error(ErrorKind::ZeroFunction, "division by zero in Q(i)");
        return GaussRat(re_ / n, -im_ / n);
    }

    GaussRat operator-() const { return GaussRat(-re_, -im_); }

    GaussRat& operator+=(const GaussRat& o)
    {
        re_ += o.re_;
        im_ += o.im_;
        return *this;
    }
    GaussRat& operator-=(const GaussRat& o)
    {
        re_ -= o.re_;
        im_ -= o.im_;
        return *this;
    }
    GaussRat& operator*=(const GaussRat& o)
    {
        if (sgn(im_) == 0 && sgn(o.im_) == 0) {
            re_ *= o.re_;
            return *this;
        }
        mpq_class r = re_ * o.re_ - im_ * o.im_;
        mpq_class m = re_ * o.im_ + im_ * o.re_;
        re_ = std::move(r);
        im_ = std::move(m);
        return *this;
    }
    GaussRat& operator/=(const GaussRat& o)
    {
        if (sgn(im_) == 0 && sgn(o.im_) == 0) {
            re_ /= o.re_;
            return *this;
        }
        return *this *= o.inverse();
    }

    friend GaussRat operator+(GaussRat a, const GaussRat& b) { return a += b; }
    friend GaussRat operator-(GaussRat a, const GaussRat& b) { return a -= b; }
    friend GaussRat operator*(GaussRat a, const GaussRat& b) { return a *= b; }
    friend GaussRat operator/(GaussRat a, const GaussRat& b) { return a /= b; }

    friend bool operator==(const GaussRat& a, const GaussRat& b)
    {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    friend bool operator!=(const GaussRat& a, const GaussRat& b) { return !(a == b); }

    /// Lexicographic on (re, im); only used for ordering containers.
    friend bool operator<(const GaussRat& a, const GaussRat& b)
    {
        if (a.re_ != b.re_) return a.re_ < b.re_;
        return a.im_ < b.im_;
    }

    std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

    /// Canonical text: "3/4+1/2i", "-i", "2", "0".
    std::string str() const
    {
        if (sgn(im_) == 0) return re_.get_str();
        std::string out;
        if (sgn(re_) != 0) out = re_.get_str();
        mpq_class a = abs(im_);
        if (sgn(im_) < 0)
            out += "-";
        else if (!out.empty())
            out += "+";
        if (a != 1) out += a.get_str();
        out += "i";
        return out;
    }

    friend std::ostream& operator<<(std::ostream& os, const GaussRat& g) { return os << g.str(); }

private:
    mpq_class re_{0};
    mpq_class im_{0};
};

} // namespace mconn
