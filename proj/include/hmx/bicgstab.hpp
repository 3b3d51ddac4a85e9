#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmx/precision.hpp"

namespace hmx {

struct SolverConfig {
    double tol = 1e-6;
    std::size_t max_iter = 1000;
    PrecisionScheme scheme = PrecisionScheme::method1(Variant::Double);
    int threads = 1;
};

struct SolverReport {
    bool converged = false;
    std::size_t iterations = 0;
    // ||r_i|| / ||b|| from the recurrences, starting with r_0
    std::vector<double> residual_history;
    // FP64 verification, computed whenever the recurrence residual drops below tol
    std::optional<double> true_residual;
    double seconds = 0.0;
    std::optional<std::string> breakdown;
};

struct SolveResult {
    std::vector<double> x;
    SolverReport report;
};

// y = A x
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

//
// Unpreconditioned BiCGSTAB with x0 = 0 and shadow residual r^ = r0. `apply` is the
// operator used by the iteration; `verify` recomputes the true residual whenever
// the recurrence residual claims convergence, and convergence is declared only
// when both are below cfg.tol.
//
SolveResult bicgstab(const LinearOperator& apply, const LinearOperator& verify,
                     std::span<const double> b, const SolverConfig& cfg);

// Iterates with the scheme's product, verifies with the FP64 masters.
SolveResult bicgstab(const SchemeHMatrix& sh, const HMatrixF64& h64, std::span<const double> b,
                     const SolverConfig& cfg);

// ||b - A64 x|| / ||b||, 0 when b = 0 and x = 0
double true_residual(const HMatrixF64& h64, std::span<const double> x, std::span<const double> b);

}  // namespace hmx
