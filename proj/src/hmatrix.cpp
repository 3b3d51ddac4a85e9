#include "hmx/hmatrix.hpp"

#include <algorithm>
#include <exception>
#include <ostream>
#include <string>
#include <type_traits>
#include <utility>

#include "hmx/error.hpp"

namespace hmx {

HMatrixF64::HMatrixF64(BlockPartition partition, std::vector<std::size_t> permutation,
                       std::vector<BlockData> blocks, std::size_t aca_fallbacks)
    : partition_(std::move(partition)),
      permutation_(std::move(permutation)),
      blocks_(std::move(blocks)) {
    const std::size_t n = partition_.size();
    if (permutation_.size() != n) throw ContractError("permutation length must equal N");
    std::vector<char> seen(n, 0);
    for (auto p : permutation_) {
        if (p >= n || seen[p]) throw ContractError("permutation is not a bijection on [0, N)");
        seen[p] = 1;
    }
    if (blocks_.size() != partition_.blocks().size())
        throw ContractError("need exactly one payload per partition block");

    report_.aca_fallbacks = aca_fallbacks;
    for (std::size_t m = 0; m < blocks_.size(); ++m) {
        const Block& b = partition_.blocks()[m];
        const std::string id = "block " + std::to_string(m);
        if (const auto* lr = std::get_if<LowRankBlockF64>(&blocks_[m])) {
            if (!b.admissible) throw ContractError(id + ": low-rank payload on inadmissible block");
            if (lr->rows != b.rows() || lr->cols != b.cols() || lr->v.size() != lr->rows * lr->rank ||
                lr->w.size() != lr->rank * lr->cols)
                throw ContractError(id + ": factor shapes do not match the block");
            if (lr->rank > std::min(lr->rows, lr->cols))
                throw ContractError(id + ": rank exceeds min(#I, #J)");
            ++report_.lowrank_blocks;
            report_.stored_scalars += lr->rank * (lr->rows + lr->cols);
            report_.rank_sum += lr->rank;
            ++report_.rank_histogram[lr->rank];
        } else {
            const auto& d = std::get<DenseBlockF64>(blocks_[m]);
            if (b.admissible) throw ContractError(id + ": dense payload on admissible block");
            if (d.rows != b.rows() || d.cols != b.cols() || d.values.size() != d.rows * d.cols)
                throw ContractError(id + ": dense shape does not match the block");
            ++report_.dense_blocks;
            report_.stored_scalars += d.rows * d.cols;
        }
    }
    report_.compression_ratio =
        static_cast<double>(report_.stored_scalars) / (static_cast<double>(n) * static_cast<double>(n));
}

HMatrixF64 build_hmatrix(const PanelMesh& mesh, const ClusterTree& tree,
                         const BlockPartition& partition, const CompressionOptions& opts) {
    if (tree.size() != mesh.size() || partition.size() != mesh.size())
        throw ContractError("mesh, cluster tree and partition sizes differ");
    const auto perm = tree.permutation();
    const auto blocks = partition.blocks();
    std::vector<BlockData> payloads(blocks.size());
    std::vector<char> fallback(blocks.size(), 0);
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t m = 0; m < blocks.size(); ++m) {
        try {
            const Block& b = blocks[m];
            if (b.admissible) {
                EntryFn entry = [&](std::size_t i, std::size_t j) {
                    return kernel_entry(mesh, perm[b.row_begin + i], perm[b.col_begin + j]);
                };
                const std::size_t max_rank = opts.max_rank == 0 ? std::min(b.rows(), b.cols())
                                                                : opts.max_rank;
                auto aca = aca_approximate(entry, b.rows(), b.cols(), opts.tol, max_rank);
                fallback[m] = aca.dense_fallback;
                payloads[m] = std::move(aca.block);
            } else {
                DenseBlockF64 d{b.rows(), b.cols(), std::vector<double>(b.rows() * b.cols())};
                for (std::size_t i = 0; i < d.rows; ++i)
                    for (std::size_t j = 0; j < d.cols; ++j)
                        d.values[i * d.cols + j] =
                            kernel_entry(mesh, perm[b.row_begin + i], perm[b.col_begin + j]);
                payloads[m] = std::move(d);
            }
        } catch (...) {
#pragma omp critical(hmx_build_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    const auto fallbacks = static_cast<std::size_t>(std::count(fallback.begin(), fallback.end(), 1));
    return HMatrixF64(partition, {perm.begin(), perm.end()}, std::move(payloads), fallbacks);
}

DenseMatrix densify(const HMatrixF64& h, std::size_t cap) {
    const std::size_t n = h.size();
    if (n > cap)
        throw SizeError("densify of N = " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
    DenseMatrix a(n, n);
    const auto perm = h.permutation();
    const auto blocks = h.partition().blocks();
    for (std::size_t m = 0; m < blocks.size(); ++m) {
        const Block& b = blocks[m];
        std::visit(
            [&](const auto& payload) {
                for (std::size_t i = 0; i < b.rows(); ++i)
                    for (std::size_t j = 0; j < b.cols(); ++j) {
                        double value;
                        if constexpr (std::is_same_v<std::decay_t<decltype(payload)>, DenseBlockF64>)
                            value = payload(i, j);
                        else
                            value = payload.entry(i, j);
                        a(perm[b.row_begin + i], perm[b.col_begin + j]) = value;
                    }
            },
            h.block(m));
    }
    return a;
}

void write_build_report(std::ostream& out, const HMatrixF64& h) {
    const auto& r = h.report();
    out << "N                  " << h.size() << '\n'
        << "blocks             " << h.blocks().size() << '\n'
        << "  dense            " << r.dense_blocks << '\n'
        << "  low-rank         " << r.lowrank_blocks << '\n'
        << "  ACA fallbacks    " << r.aca_fallbacks << '\n'
        << "stored scalars     " << r.stored_scalars << '\n'
        << "compression vs N^2 " << r.compression_ratio << '\n'
        << "rank histogram\n";
    for (const auto& [rank, count] : r.rank_histogram)
        out << "  rank " << rank << ": " << count << '\n';
}

}  // namespace hmx
