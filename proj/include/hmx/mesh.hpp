#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace hmx {

using Vec3 = std::array<double, 3>;

struct Panel {
    Vec3 centroid{};
    double area = 0.0;
    std::array<std::size_t, 3> vertices{};
};

//
// Triangulated conductor surfaces. Panel i is unknown i of the linear system.
// Immutable after construction.
//
class PanelMesh {
public:
    PanelMesh(std::vector<Vec3> vertices, std::vector<Panel> panels,
              std::vector<std::size_t> sphere_of_panel, std::vector<double> voltages);

    std::size_t size() const { return panels_.size(); }
    std::span<const Vec3> vertices() const { return vertices_; }
    std::span<const Panel> panels() const { return panels_; }
    const Panel& panel(std::size_t i) const { return panels_[i]; }
    std::size_t sphere_of(std::size_t i) const { return sphere_of_panel_[i]; }
    std::span<const double> voltages() const { return voltages_; }
    double total_area() const;

private:
    std::vector<Vec3> vertices_;
    std::vector<Panel> panels_;
    std::vector<std::size_t> sphere_of_panel_;
    std::vector<double> voltages_;
};

struct SphereLayout {
    std::vector<Vec3> centers;
    double radius = 1.0;
    int refinement = 0;
    std::vector<double> voltages;
    std::size_t max_panels = std::size_t{1} << 22;
};

// `count` unit-voltage spheres on the x axis, `spacing` apart, starting at the origin
SphereLayout default_layout(std::size_t count = 3, int refinement = 2, double spacing = 3.0,
                            double radius = 1.0);

// Icosphere mesh per sphere; refinement r gives 20*4^r panels per sphere.
// Throws GeometryError for overlapping spheres, SizeError above layout.max_panels.
PanelMesh build_sphere_mesh(const SphereLayout& layout);

// Collocation entry of the single-layer potential: panel j's charge seen at centroid i.
// Off-diagonal uses one-point quadrature, the diagonal the flat-disc self term.
double kernel_entry(const PanelMesh& mesh, std::size_t i, std::size_t j);

// b[i] = voltage of the sphere owning panel i
std::vector<double> right_hand_side(const PanelMesh& mesh);

// one line per panel: `cx cy cz area sphere_id`
void write_mesh(std::ostream& out, const PanelMesh& mesh);

}  // namespace hmx

#include "hmx/dense.hpp"

namespace hmx {

// Full coefficient matrix; entry (i, j) is exactly kernel_entry(mesh, i, j).
DenseMatrix assemble_dense(const PanelMesh& mesh, std::size_t cap = kOracleCap);

}  // namespace hmx
