#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace xai {

// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    std::vector<double> row_vec(std::size_t r) const {
        return std::vector<double>(data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                   data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
    }

    void push_row(std::span<const double> v) {
        assert(cols == 0 || v.size() == cols);
        if (cols == 0) cols = v.size();
        data.insert(data.end(), v.begin(), v.end());
        ++rows;
    }

    void push_row(std::initializer_list<double> v) {
        push_row(std::span<const double>(v.begin(), v.size()));
    }

    static Matrix from_row(std::span<const double> v) {
        Matrix m(0, v.size());
        m.push_row(v);
        return m;
    }

    static Matrix from_row(std::initializer_list<double> v) {
        return from_row(std::span<const double>(v.begin(), v.size()));
    }

    bool operator==(const Matrix&) const = default;
};

// Vertical concatenation.
inline Matrix vcat(const Matrix& a, const Matrix& b) {
    if (a.rows == 0) return b;
    if (b.rows == 0) return a;
    assert(a.cols == b.cols);
    Matrix out = a;
    out.data.insert(out.data.end(), b.data.begin(), b.data.end());
    out.rows += b.rows;
    return out;
}

}  // namespace xai
