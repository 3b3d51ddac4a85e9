#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "hmx/aca.hpp"
#include "hmx/cluster.hpp"
#include "hmx/dense.hpp"
#include "hmx/mesh.hpp"

namespace hmx {

using BlockData = std::variant<DenseBlockF64, LowRankBlockF64>;

struct BuildReport {
    std::size_t dense_blocks = 0;
    std::size_t lowrank_blocks = 0;
    std::size_t aca_fallbacks = 0;
    std::size_t stored_scalars = 0;
    std::size_t rank_sum = 0;
    std::map<std::size_t, std::size_t> rank_histogram;  // rank -> block count
    double compression_ratio = 0.0;                     // stored_scalars / N^2
};

//
// FP64 H-matrix: one payload per partition block, in permuted index space.
// Admissible blocks carry low-rank factors, the others dense entries.
//
class HMatrixF64 {
public:
    HMatrixF64(BlockPartition partition, std::vector<std::size_t> permutation,
               std::vector<BlockData> blocks, std::size_t aca_fallbacks = 0);

    std::size_t size() const { return partition_.size(); }
    const BlockPartition& partition() const { return partition_; }
    std::span<const std::size_t> permutation() const { return permutation_; }
    std::span<const BlockData> blocks() const { return blocks_; }
    const BlockData& block(std::size_t m) const { return blocks_[m]; }
    const BuildReport& report() const { return report_; }

private:
    BlockPartition partition_;
    std::vector<std::size_t> permutation_;
    std::vector<BlockData> blocks_;
    BuildReport report_;
};

struct CompressionOptions {
    double tol = 1e-8;
    // 0 means min(#rows, #cols) per block
    std::size_t max_rank = 0;
};

// Admissible blocks via ACA over permuted kernel entries, the rest filled densely.
HMatrixF64 build_hmatrix(const PanelMesh& mesh, const ClusterTree& tree,
                         const BlockPartition& partition, const CompressionOptions& opts = {});

// Expand to a dense matrix in original (unpermuted) index order.
DenseMatrix densify(const HMatrixF64& h, std::size_t cap = kOracleCap);

void write_build_report(std::ostream& out, const HMatrixF64& h);

}  // namespace hmx
