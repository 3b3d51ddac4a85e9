#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "hmx/bench.hpp"
#include "hmx/hmatrix.hpp"

namespace hmx::test {

// Default three-sphere layout at the given refinement, built once per process.
inline const BenchProblem& spheres(int refinement, double aca_tol = 1e-8) {
    static std::vector<std::pair<std::pair<int, double>, std::unique_ptr<BenchProblem>>> cache;
    for (auto& [key, p] : cache)
        if (key.first == refinement && key.second == aca_tol) return *p;
    BenchConfig cfg;
    cfg.refinement = refinement;
    cfg.aca_tol = aca_tol;
    cache.emplace_back(std::make_pair(refinement, aca_tol), std::make_unique<BenchProblem>(build_problem(cfg)));
    return *cache.back().second;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(gen);
    return v;
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double rel_inf(std::span<const double> got, std::span<const double> ref) {
    return max_abs_diff(got, ref) / max_abs(ref);
}

// H-matrix with the given blocks over identity ordering.
inline std::shared_ptr<const HMatrixF64> make_hmatrix(std::size_t n, std::vector<Block> blocks,
                                                      std::vector<BlockData> data) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    return std::make_shared<const HMatrixF64>(BlockPartition(n, std::move(blocks)), std::move(perm),
                                              std::move(data));
}

}  // namespace hmx::test
