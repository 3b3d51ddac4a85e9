#pragma once

#include <cstddef>
#include <vector>

namespace hmx {

// Largest dimension for which the O(N^2) dense paths (assembly, densify) are allowed.
inline constexpr std::size_t kOracleCap = 4096;

// Row-major FP64 matrix.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

}  // namespace hmx
