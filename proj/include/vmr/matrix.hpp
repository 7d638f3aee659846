#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vmr/errors.hpp"

namespace vmr {

// Dense row-major matrix of doubles. The only tensor type in the library;
// vectors are stored as 1xN matrices.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {
        if (rows == 0 || cols == 0)
            throw InvalidInput("Matrix: dimensions must be positive");
    }

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        if (rows_ == 0 || cols_ == 0)
            throw InvalidInput("Matrix: empty initializer");
        v_.reserve(rows_ * cols_);
        for (const auto& r : init) {
            if (r.size() != cols_)
                throw InvalidInput("Matrix: ragged initializer rows");
            v_.insert(v_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    std::span<double> row(std::size_t i) { return {v_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {v_.data() + i * cols_, cols_}; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    void fill(double x) { v_.assign(v_.size(), x); }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.v_ == b.v_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> v_;
};

inline std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw InvalidInput("matmul: inner dimensions differ (" + shape_str(a) + " * " +
                           shape_str(b) + ")");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* out_row = out.data() + i * b.cols();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* b_row = b.data() + k * b.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }

// Entrywise nonlinearity selected by name; the id is runtime data so config
// files can name it. Unknown ids are rejected.
inline Matrix elementwise(std::string_view name, const Matrix& m) {
    Matrix out = m;
    double* p = out.data();
    const std::size_t n = out.size();
    if (name == "tanh") {
        for (std::size_t i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
    } else if (name == "sigmoid") {
        for (std::size_t i = 0; i < n; ++i) p[i] = sigmoid(p[i]);
    } else if (name == "relu") {
        for (std::size_t i = 0; i < n; ++i) p[i] = relu(p[i]);
    } else {
        throw InvalidInput("elementwise: unknown nonlinearity id '" + std::string(name) + "'");
    }
    return out;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw InvalidInput("add: shape mismatch");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

inline Matrix sub(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw InvalidInput("sub: shape mismatch");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw InvalidInput("hadamard: shape mismatch");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
    return out;
}

inline Matrix scale(const Matrix& a, double c) {
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= c;
    return out;
}

inline void add_in_place(Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw InvalidInput("add_in_place: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

inline void axpy_in_place(Matrix& a, double c, const Matrix& b) {
    if (!a.same_shape(b)) throw InvalidInput("axpy_in_place: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += c * b.data()[i];
}

inline bool all_finite(const Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!std::isfinite(m.data()[i])) return false;
    return true;
}

inline void ensure_finite(const Matrix& m, std::string_view what) {
    if (!all_finite(m))
        throw NumericError("non-finite entries in " + std::string(what));
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw InvalidInput("max_abs_diff: shape mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
    return d;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidInput("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

}  // namespace vmr
