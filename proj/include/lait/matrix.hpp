#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include "lait/errors.hpp"
#include "lait/rng.hpp"

namespace lait {

// Dense row-major matrix. T is float on the forward/benchmark paths and
// double for finite-difference gradient verification.
template <typename T>
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<T> data;  // rows * cols, row-major

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, T(0)) {}
    Matrix(size_t r, size_t c, std::vector<T> d) : rows(r), cols(c), data(std::move(d)) {
        if (data.size() != rows * cols)
            throw ShapeError("matrix data length " + std::to_string(data.size()) +
                             " != " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    Matrix(std::initializer_list<std::initializer_list<T>> init) {
        rows = init.size();
        cols = rows ? init.begin()->size() : 0;
        data.reserve(rows * cols);
        for (const auto& r : init) {
            if (r.size() != cols) throw ShapeError("ragged initializer");
            data.insert(data.end(), r.begin(), r.end());
        }
    }

    T& operator()(size_t i, size_t j) { return data[i * cols + j]; }
    const T& operator()(size_t i, size_t j) const { return data[i * cols + j]; }
    T* row(size_t i) { return data.data() + i * cols; }
    const T* row(size_t i) const { return data.data() + i * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

struct BoolMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<uint8_t> data;

    BoolMatrix() = default;
    BoolMatrix(size_t r, size_t c, bool fill = false)
        : rows(r), cols(c), data(r * c, fill ? 1 : 0) {}

    uint8_t& operator()(size_t i, size_t j) { return data[i * cols + j]; }
    uint8_t operator()(size_t i, size_t j) const { return data[i * cols + j]; }
};

inline std::string shape_str(size_t r, size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols != b.rows)
        throw ShapeError("matmul: " + shape_str(a.rows, a.cols) + " x " +
                         shape_str(b.rows, b.cols));
    Matrix<T> out(a.rows, b.cols);
    // ikj order: unit-stride inner loop, and each output element accumulates
    // in ascending k, so per-row results do not depend on which rows of `a`
    // are present. Segment-wise and concatenated passes stay bit-identical.
    for (size_t i = 0; i < a.rows; ++i) {
        const T* arow = a.row(i);
        T* orow = out.row(i);
        for (size_t k = 0; k < a.cols; ++k) {
            const T aik = arow[k];
            const T* brow = b.row(k);
            for (size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

// a * b^T without materializing the transpose; rows of b stay unit-stride.
template <typename T>
Matrix<T> matmul_abt(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols != b.cols)
        throw ShapeError("matmul_abt: " + shape_str(a.rows, a.cols) + " x " +
                         shape_str(b.rows, b.cols) + "^T");
    Matrix<T> out(a.rows, b.rows);
    for (size_t i = 0; i < a.rows; ++i) {
        const T* arow = a.row(i);
        T* orow = out.row(i);
        for (size_t j = 0; j < b.rows; ++j) {
            const T* brow = b.row(j);
            T acc = T(0);
            for (size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
            orow[j] = acc;
        }
    }
    return out;
}

// dst += a^T * b, accumulated as a sum of row outer products.
template <typename T>
void accumulate_atb(Matrix<T>& dst, const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows != b.rows || dst.rows != a.cols || dst.cols != b.cols)
        throw ShapeError("accumulate_atb: incompatible shapes");
    for (size_t i = 0; i < a.rows; ++i) {
        const T* arow = a.row(i);
        const T* brow = b.row(i);
        for (size_t k = 0; k < a.cols; ++k) {
            const T aik = arow[k];
            T* drow = dst.row(k);
            for (size_t j = 0; j < b.cols; ++j) drow[j] += aik * brow[j];
        }
    }
}

// Row-wise softmax restricted to allowed positions. Disallowed scores are
// treated as -inf before exponentiation, so their weights are exactly zero.
// Rows are stabilized by the max over allowed entries.
template <typename T>
Matrix<T> row_softmax_masked(const Matrix<T>& scores, const BoolMatrix& allowed) {
    if (scores.rows != allowed.rows || scores.cols != allowed.cols)
        throw ShapeError("row_softmax_masked: scores " + shape_str(scores.rows, scores.cols) +
                         " vs mask " + shape_str(allowed.rows, allowed.cols));
    Matrix<T> out(scores.rows, scores.cols);
    for (size_t i = 0; i < scores.rows; ++i) {
        const T* s = scores.row(i);
        T* o = out.row(i);
        T mx = -std::numeric_limits<T>::infinity();
        for (size_t j = 0; j < scores.cols; ++j)
            if (allowed(i, j) && s[j] > mx) mx = s[j];
        if (mx == -std::numeric_limits<T>::infinity())
            throw MaskedRowError("row " + std::to_string(i) + " has no allowed entries");
        T sum = T(0);
        for (size_t j = 0; j < scores.cols; ++j) {
            if (allowed(i, j)) {
                o[j] = std::exp(s[j] - mx);
                sum += o[j];
            }
        }
        for (size_t j = 0; j < scores.cols; ++j)
            if (allowed(i, j)) o[j] /= sum;
    }
    return out;
}

// T5-style RMS normalization: no mean subtraction, no bias.
template <typename T>
Matrix<T> rms_norm(const Matrix<T>& x, const std::vector<T>& gain) {
    if (gain.size() != x.cols)
        throw ShapeError("rms_norm: gain length " + std::to_string(gain.size()) + " != cols " +
                         std::to_string(x.cols));
    const T eps = T(1e-6);
    Matrix<T> out(x.rows, x.cols);
    for (size_t i = 0; i < x.rows; ++i) {
        const T* xr = x.row(i);
        T* o = out.row(i);
        T ms = T(0);
        for (size_t j = 0; j < x.cols; ++j) ms += xr[j] * xr[j];
        ms /= static_cast<T>(x.cols);
        const T inv = T(1) / std::sqrt(ms + eps);
        for (size_t j = 0; j < x.cols; ++j) o[j] = xr[j] * inv * gain[j];
    }
    return out;
}

template <typename T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b) {
    if (!a.same_shape(b))
        throw ShapeError("add: " + shape_str(a.rows, a.cols) + " vs " + shape_str(b.rows, b.cols));
    Matrix<T> out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

template <typename T>
Matrix<T> relu(const Matrix<T>& x) {
    Matrix<T> out = x;
    for (T& v : out.data)
        if (v < T(0)) v = T(0);
    return out;
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& x) {
    Matrix<T> out(x.cols, x.rows);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t j = 0; j < x.cols; ++j) out(j, i) = x(i, j);
    return out;
}

template <typename T>
Matrix<T> identity(size_t n) {
    Matrix<T> out(n, n);
    for (size_t i = 0; i < n; ++i) out(i, i) = T(1);
    return out;
}

template <typename T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
    if (!a.same_shape(b))
        throw ShapeError("max_abs_diff: shape mismatch");
    double m = 0;
    for (size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i])));
    return m;
}

template <typename T>
bool bit_identical(const Matrix<T>& a, const Matrix<T>& b) {
    return a.same_shape(b) &&
           std::equal(a.data.begin(), a.data.end(), b.data.begin(),
                      [](T x, T y) { return std::memcmp(&x, &y, sizeof(T)) == 0; });
}

template <typename T>
Matrix<T> glorot_uniform(size_t rows, size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix<T> out(rows, cols);
    for (T& v : out.data) v = static_cast<T>(rng.uniform(-limit, limit));
    return out;
}

}  // namespace lait
