#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "hmx/cluster.hpp"
#include "hmx/error.hpp"
#include "hmx/mesh.hpp"

using namespace hmx;

namespace {

void check_tree(const ClusterTree& tree) {
    const auto n = tree.size();
    auto perm = std::vector<std::size_t>(tree.permutation().begin(), tree.permutation().end());
    std::sort(perm.begin(), perm.end());
    for (std::size_t k = 0; k < n; ++k) REQUIRE(perm[k] == k);
    CHECK(tree.root().start == 0);
    CHECK(tree.root().end == n);
    for (const auto& node : tree.nodes()) {
        if (node.is_leaf()) {
            CHECK(node.size() <= tree.leaf_size());
            continue;
        }
        const auto& a = tree.node((*node.children)[0]);
        const auto& b = tree.node((*node.children)[1]);
        CHECK(a.start == node.start);
        CHECK(a.end == b.start);
        CHECK(b.end == node.end);
        CHECK(a.size() > 0);
        CHECK(b.size() > 0);
    }
}

}  // namespace

TEST_CASE("four collinear points split at the median") {
    const std::vector<Vec3> pts = {{3, 0, 0}, {0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const auto tree = build_cluster_tree(pts, 2);
    check_tree(tree);
    REQUIRE(tree.root().children.has_value());
    const auto& left = tree.node((*tree.root().children)[0]);
    const auto& right = tree.node((*tree.root().children)[1]);
    CHECK(left.is_leaf());
    CHECK(right.is_leaf());
    auto members = [&](const ClusterNode& c) {
        return std::set<std::size_t>(tree.permutation().begin() + c.start, tree.permutation().begin() + c.end);
    };
    CHECK(members(left) == std::set<std::size_t>{1, 2});
    CHECK(members(right) == std::set<std::size_t>{0, 3});
}

TEST_CASE("single panel tree") {
    const std::vector<Vec3> pts = {{0.5, 0.5, 0.5}};
    const auto tree = build_cluster_tree(pts, 32);
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.root().is_leaf());
    CHECK(tree.permutation()[0] == 0);
    const auto part = build_block_partition(tree);
    REQUIRE(part.blocks().size() == 1);
    CHECK_FALSE(part.blocks()[0].admissible);
}

TEST_CASE("cluster trees over sphere meshes") {
    for (int r : {0, 1, 2}) {
        const auto mesh = build_sphere_mesh(default_layout(3, r));
        for (std::size_t leaf : {1u, 8u, 32u}) check_tree(build_cluster_tree(mesh, leaf));
    }
    const auto mesh = build_sphere_mesh(default_layout(3, 1));
    CHECK_THROWS_AS(build_cluster_tree(mesh, 0), ContractError);
}

TEST_CASE("box geometry") {
    const BoundingBox a{{0, 0, 0}, {1, 1, 1}};
    const BoundingBox b{{4, 0, 0}, {5, 1, 1}};
    const BoundingBox c{{1, 1, 1}, {2, 2, 2}};
    CHECK(a.diameter() == doctest::Approx(std::sqrt(3.0)));
    CHECK(a.distance(b) == doctest::Approx(3.0));
    CHECK(a.distance(c) == 0.0);
    CHECK(is_admissible(a, b, 2.0));
    CHECK_FALSE(is_admissible(a, b, 0.5));
    CHECK_FALSE(is_admissible(a, c, 1e9));
    CHECK_FALSE(is_admissible(a, a, 1e9));
}

TEST_CASE("partition covers the index square exactly once") {
    for (int r : {0, 1, 2}) {
        const auto mesh = build_sphere_mesh(default_layout(3, r));
        const auto tree = build_cluster_tree(mesh, 16);
        for (double eta : {0.5, 1.0, 2.0, 4.0}) {
            const auto part = build_block_partition(tree, eta);
            CHECK(part.area_identity_holds());
            if (mesh.size() <= 512) CHECK(part.bitmap_cover_holds());
            for (const auto& blk : part.blocks()) {
                const bool overlap = blk.row_begin < blk.col_end && blk.col_begin < blk.row_end;
                if (overlap) CHECK_FALSE(blk.admissible);
                if (!blk.admissible) CHECK(std::min(blk.rows(), blk.cols()) <= tree.leaf_size());
            }
        }
    }
}

TEST_CASE("leaf-sized problem is one dense block") {
    const auto mesh = build_sphere_mesh(default_layout(1, 0));
    const auto part = build_block_partition(build_cluster_tree(mesh, 32));
    REQUIRE(part.blocks().size() == 1);
    CHECK_FALSE(part.blocks()[0].admissible);
    CHECK(part.blocks()[0].rows() == 20);
}

TEST_CASE("distant spheres interact through admissible blocks") {
    auto layout = default_layout(2, 1, 20.0);
    const auto mesh = build_sphere_mesh(layout);
    const auto tree = build_cluster_tree(mesh, 16);
    const auto& a = tree.node((*tree.root().children)[0]);
    const auto& b = tree.node((*tree.root().children)[1]);
    CHECK(is_admissible(a.box, b.box, 2.0));
    const auto part = build_block_partition(tree, 2.0);
    bool found = false;
    for (const auto& blk : part.blocks())
        if (blk.row_begin == a.start && blk.row_end == a.end && blk.col_begin == b.start && blk.col_end == b.end)
            found = blk.admissible;
    CHECK(found);
    // every cross-sphere entry lies in an admissible block
    for (const auto& blk : part.blocks()) {
        const auto s = mesh.sphere_of(tree.permutation()[blk.row_begin]);
        const auto t = mesh.sphere_of(tree.permutation()[blk.col_begin]);
        if (s != t) CHECK(blk.admissible);
    }
}

TEST_CASE("tree and partition are deterministic") {
    const auto mesh = build_sphere_mesh(default_layout(3, 2));
    const auto t1 = build_cluster_tree(mesh);
    const auto t2 = build_cluster_tree(mesh);
    CHECK(std::equal(t1.permutation().begin(), t1.permutation().end(), t2.permutation().begin()));
    std::ostringstream o1, o2;
    write_partition(o1, build_block_partition(t1));
    write_partition(o2, build_block_partition(t2));
    CHECK(o1.str() == o2.str());
}

TEST_CASE("partition export lists every block") {
    const auto mesh = build_sphere_mesh(default_layout(3, 1));
    const auto part = build_block_partition(build_cluster_tree(mesh));
    std::ostringstream out;
    write_partition(out, part);
    std::istringstream in(out.str());
    std::size_t is, ie, js, je, adm, count = 0;
    while (in >> is >> ie >> js >> je >> adm) {
        const auto& blk = part.blocks()[count++];
        CHECK(is == blk.row_begin);
        CHECK(ie == blk.row_end);
        CHECK(js == blk.col_begin);
        CHECK(je == blk.col_end);
        CHECK(adm == (blk.admissible ? 1u : 0u));
    }
    CHECK(count == part.blocks().size());
}

TEST_CASE("partition validation") {
    CHECK_THROWS_AS(BlockPartition(4, {{0, 5, 0, 4, false}}), ContractError);
    CHECK_THROWS_AS(BlockPartition(4, {{2, 2, 0, 4, false}}), ContractError);
    const BlockPartition overlapping(4, {{0, 4, 0, 4, false}, {0, 1, 0, 1, false}});
    CHECK_FALSE(overlapping.area_identity_holds());
    CHECK_FALSE(overlapping.bitmap_cover_holds());
    const BlockPartition gap(4, {{0, 2, 0, 4, false}});
    CHECK_FALSE(gap.bitmap_cover_holds());
    const BlockPartition strips(4, {{0, 2, 0, 4, false}, {2, 4, 0, 4, true}});
    CHECK(strips.area_identity_holds());
    CHECK(strips.bitmap_cover_holds());
    CHECK(strips.admissible_count() == 1);
}
