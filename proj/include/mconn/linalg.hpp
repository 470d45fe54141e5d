#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "ratfun.hpp"

namespace mconn {

/// Row-major dense matrix with value semantics.
template <typename T>
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, const T& fill = T()) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n)
    {
        Mat m(n, n, T(0));
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Mat transpose() const
    {
        Mat r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    std::vector<T> column(std::size_t j) const
    {
        std::vector<T> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    void set_column(std::size_t j, const std::vector<T>& c)
    {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
    }

    friend bool operator==(const Mat& a, const Mat& b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    friend std::vector<T> operator*(const Mat& a, const std::vector<T>& v)
    {
        std::vector<T> r(a.rows_, T(0));
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) r[i] += a(i, j) * v[j];
        return r;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RatMat = Mat<RatFun>;
using GaussMat = Mat<GaussRat>;

/// Fraction-free (Bareiss) determinant of a polynomial matrix.
inline Poly bareiss_determinant(Mat<Poly> m)
{
    const std::size_t n = m.rows();
    if (n == 0) return Poly(1);
    bool negate = false;
    Poly prev(1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m(k, k).is_zero()) {
            std::size_t p = k + 1;
            while (p < n && m(p, k).is_zero()) ++p;
            if (p == n) return {};
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            negate = !negate;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j)
                m(i, j) = exact_div(m(k, k) * m(i, j) - m(i, k) * m(k, j), prev);
            m(i, k) = Poly();
        }
        prev = m(k, k);
    }
    Poly d = m(n - 1, n - 1);
    return negate ? -d : d;
}

/// Exact determinant: clear denominators column by column, then Bareiss.
inline RatFun determinant(const RatMat& a)
{
    const std::size_t n = a.rows();
    Mat<Poly> p(n, n);
    Poly scale(1);
    for (std::size_t j = 0; j < n; ++j) {
        Poly l(1);
        for (std::size_t i = 0; i < n; ++i) {
            const Poly& d = a(i, j).den();
            if (d.degree() > 0) l = exact_div(l * d, gcd(l, d));
        }
        for (std::size_t i = 0; i < n; ++i) p(i, j) = a(i, j).num() * exact_div(l, a(i, j).den());
        scale = scale * l;
    }
    return RatFun(bareiss_determinant(std::move(p)), scale);
}

/// Exact solution of A x = b over the rational-function field.
inline std::vector<RatFun> solve_linear(RatMat a, std::vector<RatFun> b)
{
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw Error(ErrorKind::InvalidArgument, "solve_linear needs a square system");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && a(p, k).is_zero()) ++p;
        if (p == n) throw Error(ErrorKind::SingularMatrix, "determinant vanishes identically");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(b[k], b[p]);
        }
        RatFun inv = a(k, k).inverse();
        for (std::size_t i = k + 1; i < n; ++i) {
            if (a(i, k).is_zero()) continue;
            RatFun f = a(i, k) * inv;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<RatFun> x(n);
    for (std::size_t k = n; k-- > 0;) {
        RatFun acc = b[k];
        for (std::size_t j = k + 1; j < n; ++j) acc -= a(k, j) * x[j];
        x[k] = acc / a(k, k);
    }
    return x;
}

/// Exact rank over Q(i).
inline std::size_t rank(GaussMat a)
{
    std::size_t r = 0;
    for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
        std::size_t p = r;
        while (p < a.rows() && a(p, c).is_zero()) ++p;
        if (p == a.rows()) continue;
        for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(r, j), a(p, j));
        GaussRat inv = a(r, c).inverse();
        for (std::size_t i = r + 1; i < a.rows(); ++i) {
            if (a(i, c).is_zero()) continue;
            GaussRat f = a(i, c) * inv;
            for (std::size_t j = c; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
        }
        ++r;
    }
    return r;
}

} // namespace mconn
