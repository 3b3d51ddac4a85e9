#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hmx/bicgstab.hpp"
#include "hmx/cluster.hpp"
#include "hmx/hmatrix.hpp"
#include "hmx/mesh.hpp"
#include "hmx/precision.hpp"

namespace hmx {

enum class ReportFormat { Json, Csv };

struct BenchConfig {
    std::size_t spheres = 3;
    int refinement = 2;
    double spacing = 3.0;
    double radius = 1.0;
    std::vector<double> voltages;  // empty: all 1
    double aca_tol = 1e-8;
    std::size_t leaf_size = 32;
    double eta = 2.0;
    std::vector<PrecisionScheme> schemes = standard_schemes();
    std::vector<int> c_list;  // each adds an m3:c=<c> scheme
    std::vector<int> threads = {1};
    std::size_t reps = 1000;
    std::size_t sets = 10;
    std::uint64_t seed = 42;
    double solver_tol = 1e-6;
    std::size_t max_iter = 1000;
    std::string out;  // empty: no file
    ReportFormat format = ReportFormat::Csv;
};

struct BenchRecord {
    std::string scheme;
    int threads = 1;
    double mean_time_s = 0.0;
    double stddev_s = 0.0;
    std::vector<double> set_times_s;
    std::size_t payload_bytes = 0;
    std::optional<std::size_t> iterations;  // solver runs only
    std::optional<double> true_residual;    // solver runs only
    std::optional<bool> converged;          // solver runs only
    double speedup = 1.0;                   // vs m1-double at the same thread count
};

// Mesh, partition and FP64 H-matrix, built once per invocation.
struct BenchProblem {
    PanelMesh mesh;
    ClusterTree tree;
    BlockPartition partition;
    std::shared_ptr<const HMatrixF64> h;
    std::vector<double> rhs;
};

BenchProblem build_problem(const BenchConfig& cfg);

// Schemes in run order: cfg.schemes followed by one m3 scheme per entry of cfg.c_list.
std::vector<PrecisionScheme> bench_schemes(const BenchConfig& cfg);

// Uniform in [-1, 1): std::mt19937_64 seeded with `seed`, value = 2 * (draw >> 11) * 2^-53 - 1.
std::vector<double> seeded_source(std::size_t n, std::uint64_t seed);

std::vector<BenchRecord> run_matvec_bench(const BenchConfig& cfg);
std::vector<BenchRecord> run_matvec_bench(const BenchProblem& problem, const BenchConfig& cfg);
std::vector<BenchRecord> run_solver_bench(const BenchConfig& cfg);
std::vector<BenchRecord> run_solver_bench(const BenchProblem& problem, const BenchConfig& cfg);

// CSV header: scheme,threads,mean_time_s,stddev_s,payload_bytes,iterations,true_residual,speedup
std::string format_report(const std::vector<BenchRecord>& records, ReportFormat format);
// Throws ContractError for an empty record list (nothing is written) and IoError when
// the path cannot be written.
void emit_report(const std::vector<BenchRecord>& records, ReportFormat format, const std::string& path);
std::vector<BenchRecord> parse_json_report(const std::string& text);

}  // namespace hmx
