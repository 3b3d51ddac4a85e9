#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace hmx {

using EntryFn = std::function<double(std::size_t, std::size_t)>;

// Row-major FP64 block.
struct DenseBlockF64 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

//
// V * W with V stored column by column (v[k * rows + i]) and W row by row
// (w[k * cols + j]). rank == 0 represents the zero block.
//
struct LowRankBlockF64 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t rank = 0;
    std::vector<double> v;
    std::vector<double> w;

    double v_at(std::size_t i, std::size_t k) const { return v[k * rows + i]; }
    double w_at(std::size_t k, std::size_t j) const { return w[k * cols + j]; }
    double entry(std::size_t i, std::size_t j) const;
};

struct AcaResult {
    LowRankBlockF64 block;
    // partial pivoting ran out of pivot rows with a nonzero remainder; the block
    // was evaluated densely and stored exactly as a rank-min(rows, cols) product
    bool dense_fallback = false;
};

//
// Adaptive cross approximation with partial pivoting, starting at row 0.
// A candidate cross u v^T is rejected, and the iteration stops, once
// |u| |v| <= tol * |A_k|_F where |A_k|_F is the running Frobenius estimate
// of the approximation including that cross. Stops as well at max_rank.
//
AcaResult aca_approximate(const EntryFn& entry, std::size_t rows, std::size_t cols, double tol,
                          std::size_t max_rank);

}  // namespace hmx
