#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hmx/dense.hpp"

// Deliberately plain dense reference arithmetic for tests.
namespace hmx::oracle {

std::vector<double> dense_matvec(const DenseMatrix& a, std::span<const double> x);

// LU with partial pivoting. Throws SingularityError when a pivot falls below 1e-14 * ||A||_inf.
std::vector<double> dense_solve(const DenseMatrix& a, std::span<const double> b,
                                std::size_t cap = kOracleCap);

// ||A - B||_F / ||A||_F, 0 when both vanish
double frobenius_error(const DenseMatrix& a, const DenseMatrix& b);

// descending
std::vector<double> singular_values(const DenseMatrix& a);

// Frobenius error of the best rank-r approximation, relative to ||A||_F
double best_rank_error(const DenseMatrix& a, std::size_t rank);

}  // namespace hmx::oracle
