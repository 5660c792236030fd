#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace annosim {

// Dense row-major matrix of doubles. Just enough linear algebra for a
// softmax-regression trainer; rows are instances, columns are features
// or classes depending on context.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool empty() const { return data.empty(); }

    bool operator==(const Matrix&) const = default;
};

}  // namespace annosim
