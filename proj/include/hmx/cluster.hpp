#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hmx/mesh.hpp"

namespace hmx {

struct BoundingBox {
    Vec3 lo{};
    Vec3 hi{};

    double diameter() const;
    // Euclidean gap between the boxes, 0 when they touch or overlap
    double distance(const BoundingBox& other) const;
};

struct ClusterNode {
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive
    BoundingBox box;
    std::optional<std::array<std::size_t, 2>> children;  // node indices

    std::size_t size() const { return end - start; }
    bool is_leaf() const { return !children.has_value(); }
};

//
// Binary cluster tree over panel centroids. Node ranges refer to the permuted
// ordering: permuted index k corresponds to original panel permutation()[k].
//
class ClusterTree {
public:
    ClusterTree(std::vector<std::size_t> permutation, std::vector<ClusterNode> nodes,
                std::size_t leaf_size);

    std::size_t size() const { return permutation_.size(); }
    std::size_t leaf_size() const { return leaf_size_; }
    std::span<const std::size_t> permutation() const { return permutation_; }
    std::span<const ClusterNode> nodes() const { return nodes_; }
    const ClusterNode& node(std::size_t id) const { return nodes_[id]; }
    const ClusterNode& root() const { return nodes_.front(); }

private:
    std::vector<std::size_t> permutation_;
    std::vector<ClusterNode> nodes_;
    std::size_t leaf_size_;
};

// Recursive bisection along the longest box axis at the median centroid coordinate.
ClusterTree build_cluster_tree(const PanelMesh& mesh, std::size_t leaf_size = 32);
// Same, over bare points (one cluster index per point).
ClusterTree build_cluster_tree(std::span<const Vec3> points, std::size_t leaf_size = 32);

struct Block {
    std::size_t row_begin = 0;
    std::size_t row_end = 0;
    std::size_t col_begin = 0;
    std::size_t col_end = 0;
    bool admissible = false;

    std::size_t rows() const { return row_end - row_begin; }
    std::size_t cols() const { return col_end - col_begin; }
};

// Disjoint cover of [0,N) x [0,N) (permuted indices) by blocks.
class BlockPartition {
public:
    BlockPartition(std::size_t n, std::vector<Block> blocks);

    std::size_t size() const { return n_; }
    std::span<const Block> blocks() const { return blocks_; }
    std::size_t admissible_count() const;

    // Sum of block areas equals N^2.
    bool area_identity_holds() const;
    // Exhaustive N x N bitmap check of disjointness and coverage.
    bool bitmap_cover_holds() const;

private:
    std::size_t n_;
    std::vector<Block> blocks_;
};

// min(diam s, diam t) <= eta * dist(s, t), with dist > 0
bool is_admissible(const BoundingBox& s, const BoundingBox& t, double eta);

BlockPartition build_block_partition(const ClusterTree& tree, double eta = 2.0);

// one line per block: `i_s i_e j_s j_e admissible(0|1)`
void write_partition(std::ostream& out, const BlockPartition& partition);

}  // namespace hmx
