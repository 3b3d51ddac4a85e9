#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hmx/error.hpp"
#include "hmx/mesh.hpp"

using namespace hmx;

namespace {

PanelMesh two_panels(const Vec3& c0, const Vec3& c1, double area0, double area1) {
    std::vector<Vec3> verts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    std::vector<Panel> panels = {{c0, area0, {0, 1, 2}}, {c1, area1, {0, 1, 2}}};
    return PanelMesh(verts, panels, {0, 0}, {1.0});
}

}  // namespace

TEST_CASE("panel counts follow 20 * 4^r per sphere") {
    auto one = default_layout(1, 0);
    CHECK(build_sphere_mesh(one).size() == 20);
    CHECK(build_sphere_mesh(default_layout(3, 2)).size() == 960);
    CHECK(build_sphere_mesh(default_layout(2, 1)).size() == 160);
}

TEST_CASE("panels are well formed") {
    const auto mesh = build_sphere_mesh(default_layout(2, 2));
    for (const auto& p : mesh.panels()) {
        CHECK(p.area > 0.0);
        for (auto v : p.vertices) REQUIRE(v < mesh.vertices().size());
        for (int k = 0; k < 3; ++k) {
            const double mean = (mesh.vertices()[p.vertices[0]][k] + mesh.vertices()[p.vertices[1]][k] +
                                 mesh.vertices()[p.vertices[2]][k]) / 3.0;
            CHECK(p.centroid[k] == doctest::Approx(mean).epsilon(1e-15));
        }
    }
}

TEST_CASE("mesh area approaches the sphere area monotonically") {
    const double exact = 4.0 * std::numbers::pi * 2.0 * 2.0;
    double previous = INFINITY;
    for (int r = 0; r <= 3; ++r) {
        auto layout = default_layout(1, r, 3.0, 2.0);
        const double err = std::abs(build_sphere_mesh(layout).total_area() - exact) / exact;
        CHECK(err < previous);
        previous = err;
        if (r == 3) CHECK(err < 0.02);
    }
}

TEST_CASE("geometry and size errors") {
    CHECK_THROWS_AS(build_sphere_mesh(default_layout(2, 0, 1.5)), GeometryError);
    CHECK_THROWS_AS(build_sphere_mesh(default_layout(2, 0, 2.0)), GeometryError);
    auto bad_voltages = default_layout(2, 0);
    bad_voltages.voltages.pop_back();
    CHECK_THROWS_AS(build_sphere_mesh(bad_voltages), GeometryError);
    auto none = default_layout(0, 0);
    CHECK_THROWS_AS(build_sphere_mesh(none), GeometryError);
    auto huge = default_layout(3, 12);
    CHECK_THROWS_AS(build_sphere_mesh(huge), SizeError);
    auto capped = default_layout(3, 1);
    capped.max_panels = 200;
    CHECK_THROWS_AS(build_sphere_mesh(capped), SizeError);
}

TEST_CASE("kernel entry closed forms") {
    const auto mesh = two_panels({0, 0, 0}, {1, 0, 0}, std::numbers::pi, 4.0 * std::numbers::pi);
    CHECK(kernel_entry(mesh, 0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(kernel_entry(mesh, 0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(kernel_entry(mesh, 1, 0) == doctest::Approx(0.25).epsilon(1e-15));

    const auto clash = two_panels({1, 2, 3}, {1, 2, 3}, 1.0, 1.0);
    CHECK_THROWS_AS(kernel_entry(clash, 0, 1), SingularityError);
    CHECK_NOTHROW(kernel_entry(clash, 1, 1));
}

TEST_CASE("kernel entry matches an independent evaluation") {
    const auto mesh = build_sphere_mesh(default_layout(3, 1));
    // re-derived here from vertex data only
    auto oracle = [&](std::size_t i, std::size_t j) {
        const auto& pi = mesh.panel(i);
        const auto& pj = mesh.panel(j);
        auto centroid = [&](const Panel& p) {
            Vec3 c{};
            for (auto v : p.vertices)
                for (int k = 0; k < 3; ++k) c[k] += mesh.vertices()[v][k] / 3.0;
            return c;
        };
        const auto ci = centroid(pi);
        const auto cj = centroid(pj);
        if (i == j) return std::sqrt(pi.area / std::acos(-1.0)) * 0.5;
        const double r = std::hypot(ci[0] - cj[0], ci[1] - cj[1], ci[2] - cj[2]);
        return pj.area / (4.0 * std::acos(-1.0) * r);
    };
    for (auto [i, j] : {std::pair<std::size_t, std::size_t>{3, 17}, {100, 7}, {5, 230}, {42, 42}})
        CHECK(kernel_entry(mesh, i, j) == doctest::Approx(oracle(i, j)).epsilon(1e-13));
}

TEST_CASE("right-hand side follows sphere voltages") {
    auto layout = default_layout(3, 0);
    layout.voltages = {1.0, -1.0, 1.0};
    const auto b = right_hand_side(build_sphere_mesh(layout));
    REQUIRE(b.size() == 60);
    for (std::size_t i = 0; i < 60; ++i) CHECK(b[i] == (i / 20 == 1 ? -1.0 : 1.0));

    auto zero = default_layout(2, 1);
    zero.voltages = {0.0, 0.0};
    for (double v : right_hand_side(build_sphere_mesh(zero))) CHECK(v == 0.0);
    for (double v : right_hand_side(build_sphere_mesh(default_layout(1, 1)))) CHECK(v == 1.0);
}

TEST_CASE("dense assembly") {
    const auto mesh = build_sphere_mesh(default_layout(1, 0));
    const auto a = assemble_dense(mesh);
    REQUIRE(a.rows == 20);
    REQUIRE(a.cols == 20);
    for (double v : a.data) CHECK(v > 0.0);

    const auto big = build_sphere_mesh(default_layout(2, 1));
    const auto b = assemble_dense(big);
    for (std::size_t i = 0; i < big.size(); ++i) {
        double row = 0.0, by_entry = 0.0;
        for (std::size_t j = 0; j < big.size(); ++j) {
            row += b(i, j) * 1.0;
            by_entry += kernel_entry(big, i, j);
            // bit-identical and pure
            REQUIRE(b(i, j) == kernel_entry(big, i, j));
        }
        CHECK(row == by_entry);
    }
    // A_ij area_i and A_ji area_j are both area_i area_j / (4 pi r)
    for (std::size_t i = 0; i < big.size(); i += 7)
        for (std::size_t j = 0; j < big.size(); j += 5)
            if (i != j)
                CHECK(b(i, j) * big.panel(i).area ==
                      doctest::Approx(b(j, i) * big.panel(j).area).epsilon(1e-14));

    CHECK_THROWS_AS(assemble_dense(big, 100), SizeError);
}

TEST_CASE("mesh export carries full precision") {
    const auto mesh = build_sphere_mesh(default_layout(2, 0));
    std::ostringstream out;
    write_mesh(out, mesh);
    std::istringstream in(out.str());
    std::size_t count = 0;
    double cx, cy, cz, area;
    std::size_t sphere;
    while (in >> cx >> cy >> cz >> area >> sphere) {
        const auto& p = mesh.panel(count);
        CHECK(cx == p.centroid[0]);
        CHECK(cy == p.centroid[1]);
        CHECK(cz == p.centroid[2]);
        CHECK(area == p.area);
        CHECK(sphere == mesh.sphere_of(count));
        ++count;
    }
    CHECK(count == mesh.size());
}
