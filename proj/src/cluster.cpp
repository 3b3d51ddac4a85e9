#include "hmx/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

#include "hmx/error.hpp"

namespace hmx {

double BoundingBox::diameter() const {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += (hi[k] - lo[k]) * (hi[k] - lo[k]);
    return std::sqrt(s);
}

double BoundingBox::distance(const BoundingBox& other) const {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double gap = std::max({0.0, lo[k] - other.hi[k], other.lo[k] - hi[k]});
        s += gap * gap;
    }
    return std::sqrt(s);
}

ClusterTree::ClusterTree(std::vector<std::size_t> permutation, std::vector<ClusterNode> nodes,
                         std::size_t leaf_size)
    : permutation_(std::move(permutation)), nodes_(std::move(nodes)), leaf_size_(leaf_size) {
    if (nodes_.empty() || nodes_.front().start != 0 || nodes_.front().end != permutation_.size())
        throw ContractError("cluster tree root must span [0, N)");
}

namespace {

BoundingBox bounds(std::span<const Vec3> points, std::span<const std::size_t> ids) {
    BoundingBox box;
    box.lo.fill(std::numeric_limits<double>::infinity());
    box.hi.fill(-std::numeric_limits<double>::infinity());
    for (auto id : ids)
        for (int k = 0; k < 3; ++k) {
            box.lo[k] = std::min(box.lo[k], points[id][k]);
            box.hi[k] = std::max(box.hi[k], points[id][k]);
        }
    return box;
}

}  // namespace

ClusterTree build_cluster_tree(std::span<const Vec3> points, std::size_t leaf_size) {
    if (points.empty()) throw ContractError("cluster tree needs at least one point");
    if (leaf_size == 0) throw ContractError("leaf size must be >= 1");

    std::vector<std::size_t> perm(points.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;

    std::vector<ClusterNode> nodes;
    nodes.push_back({0, perm.size(), {}, std::nullopt});

    // breadth-first over the node list; children are appended as they are created
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        const std::size_t start = nodes[id].start;
        const std::size_t end = nodes[id].end;
        std::span<std::size_t> range(perm.data() + start, end - start);
        nodes[id].box = bounds(points, range);
        if (range.size() <= leaf_size) continue;

        const BoundingBox& box = nodes[id].box;
        int axis = 0;
        for (int k = 1; k < 3; ++k)
            if (box.hi[k] - box.lo[k] > box.hi[axis] - box.lo[axis]) axis = k;

        std::sort(range.begin(), range.end(), [&](std::size_t a, std::size_t b) {
            if (points[a][axis] != points[b][axis]) return points[a][axis] < points[b][axis];
            return a < b;
        });
        const std::size_t mid = start + range.size() / 2;
        const std::size_t left = nodes.size();
        nodes[id].children = std::array<std::size_t, 2>{left, left + 1};
        nodes.push_back({start, mid, {}, std::nullopt});
        nodes.push_back({mid, end, {}, std::nullopt});
    }
    return ClusterTree(std::move(perm), std::move(nodes), leaf_size);
}

ClusterTree build_cluster_tree(const PanelMesh& mesh, std::size_t leaf_size) {
    std::vector<Vec3> centroids;
    centroids.reserve(mesh.size());
    for (const auto& p : mesh.panels()) centroids.push_back(p.centroid);
    return build_cluster_tree(centroids, leaf_size);
}

BlockPartition::BlockPartition(std::size_t n, std::vector<Block> blocks)
    : n_(n), blocks_(std::move(blocks)) {
    for (const auto& b : blocks_)
        if (b.row_begin >= b.row_end || b.col_begin >= b.col_end || b.row_end > n_ ||
            b.col_end > n_)
            throw ContractError("block ranges must be nonempty and lie within [0, N)");
}

std::size_t BlockPartition::admissible_count() const {
    return static_cast<std::size_t>(
        std::count_if(blocks_.begin(), blocks_.end(), [](const Block& b) { return b.admissible; }));
}

bool BlockPartition::area_identity_holds() const {
    std::size_t sum = 0;
    for (const auto& b : blocks_) sum += b.rows() * b.cols();
    return sum == n_ * n_;
}

bool BlockPartition::bitmap_cover_holds() const {
    std::vector<unsigned char> hit(n_ * n_, 0);
    for (const auto& b : blocks_)
        for (std::size_t i = b.row_begin; i < b.row_end; ++i)
            for (std::size_t j = b.col_begin; j < b.col_end; ++j) {
                if (hit[i * n_ + j]) return false;
                hit[i * n_ + j] = 1;
            }
    return std::all_of(hit.begin(), hit.end(), [](unsigned char h) { return h != 0; });
}

bool is_admissible(const BoundingBox& s, const BoundingBox& t, double eta) {
    const double dist = s.distance(t);
    return dist > 0.0 && std::min(s.diameter(), t.diameter()) <= eta * dist;
}

namespace {

void partition_pair(const ClusterTree& tree, std::size_t s, std::size_t t, double eta,
                    std::vector<Block>& out) {
    const ClusterNode& row = tree.node(s);
    const ClusterNode& col = tree.node(t);
    if (is_admissible(row.box, col.box, eta)) {
        out.push_back({row.start, row.end, col.start, col.end, true});
        return;
    }
    if (row.is_leaf() && col.is_leaf()) {
        out.push_back({row.start, row.end, col.start, col.end, false});
        return;
    }
    if (row.is_leaf()) {
        for (auto c : *col.children) partition_pair(tree, s, c, eta, out);
    } else if (col.is_leaf()) {
        for (auto r : *row.children) partition_pair(tree, r, t, eta, out);
    } else {
        for (auto r : *row.children)
            for (auto c : *col.children) partition_pair(tree, r, c, eta, out);
    }
}

}  // namespace

BlockPartition build_block_partition(const ClusterTree& tree, double eta) {
    if (!(eta > 0.0)) throw ContractError("eta must be positive");
    std::vector<Block> blocks;
    partition_pair(tree, 0, 0, eta, blocks);
    return BlockPartition(tree.size(), std::move(blocks));
}

void write_partition(std::ostream& out, const BlockPartition& partition) {
    for (const auto& b : partition.blocks())
        out << b.row_begin << ' ' << b.row_end << ' ' << b.col_begin << ' ' << b.col_end << ' '
            << (b.admissible ? 1 : 0) << '\n';
}

}  // namespace hmx
