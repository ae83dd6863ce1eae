#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cslab/common.hpp"

namespace cslab {

namespace detail {

inline double conj_of(double v) { return v; }
inline std::complex<double> conj_of(const std::complex<double>& v) { return std::conj(v); }

inline double real_of(double v) { return v; }
inline double real_of(const std::complex<double>& v) { return v.real(); }

inline double abs_sq(double v) { return v * v; }
inline double abs_sq(const std::complex<double>& v) { return std::norm(v); }

}  // namespace detail

// Dense row-major matrix over double or complex<double>.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const T* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

template <class T>
Matrix<T> adjoint(const Matrix<T>& a) {
    Matrix<T> out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = detail::conj_of(a(r, c));
    return out;
}

template <class T>
std::vector<T> matvec(const Matrix<T>& a, const std::vector<T>& x) {
    if (x.size() != a.cols()) throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<T> y(a.rows(), T{});
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const T* row = a.row_ptr(r);
        T s{};
        for (std::size_t c = 0; c < a.cols(); ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

// y = A^* x  (conjugate-transpose product, no explicit transpose storage)
template <class T>
std::vector<T> adjoint_matvec(const Matrix<T>& a, const std::vector<T>& x) {
    if (x.size() != a.rows()) throw std::invalid_argument("adjoint_matvec: dimension mismatch");
    std::vector<T> y(a.cols(), T{});
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const T* row = a.row_ptr(r);
        const T xr = x[r];
        for (std::size_t c = 0; c < a.cols(); ++c) y[c] += detail::conj_of(row[c]) * xr;
    }
    return y;
}

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
    Matrix<T> out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T aik = a(i, k);
            const T* brow = b.row_ptr(k);
            T* orow = out.row_ptr(i);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

// A^* A, exactly Hermitian by construction.
template <class T>
Matrix<T> gram(const Matrix<T>& a) {
    Matrix<T> g(a.cols(), a.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) {
        for (std::size_t j = i; j < a.cols(); ++j) {
            T s{};
            for (std::size_t r = 0; r < a.rows(); ++r) s += detail::conj_of(a(r, i)) * a(r, j);
            g(i, j) = s;
            g(j, i) = detail::conj_of(s);
        }
        g(i, i) = T{detail::real_of(g(i, i))};
    }
    return g;
}

template <class T>
double frobenius_norm(const Matrix<T>& a) {
    double s = 0.0;
    for (const auto& v : a.data()) s += detail::abs_sq(v);
    return std::sqrt(s);
}

template <class T>
double max_abs(const Matrix<T>& a) {
    double s = 0.0;
    for (const auto& v : a.data()) s = std::max(s, std::abs(v));
    return s;
}

template <class T>
Matrix<T> extract_columns(const Matrix<T>& a, const std::vector<std::size_t>& cols) {
    for (std::size_t c : cols)
        if (c >= a.cols()) throw std::out_of_range("extract_columns: column index out of range");
    Matrix<T> out(a.rows(), cols.size());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t j = 0; j < cols.size(); ++j) out(r, j) = a(r, cols[j]);
    return out;
}

}  // namespace cslab
