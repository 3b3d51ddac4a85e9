#include "hmx/mesh.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>

#include "hmx/error.hpp"

namespace hmx {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    return {a[0] / n, a[1] / n, a[2] / n};
}

using Face = std::array<std::size_t, 3>;

// unit icosphere, counter-clockwise faces seen from outside
void unit_icosphere(int refinement, std::vector<Vec3>& verts, std::vector<Face>& faces) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    verts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
             {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) v = normalized(v);
    faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},   {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    for (int level = 0; level < refinement; ++level) {
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoints;
        auto midpoint = [&](std::size_t a, std::size_t b) {
            const auto key = std::minmax(a, b);
            auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            const Vec3& p = verts[a];
            const Vec3& q = verts[b];
            verts.push_back(normalized({(p[0] + q[0]) / 2, (p[1] + q[1]) / 2, (p[2] + q[2]) / 2}));
            midpoints.emplace(key, verts.size() - 1);
            return verts.size() - 1;
        };
        std::vector<Face> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const std::size_t ab = midpoint(f[0], f[1]);
            const std::size_t bc = midpoint(f[1], f[2]);
            const std::size_t ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
}

}  // namespace

PanelMesh::PanelMesh(std::vector<Vec3> vertices, std::vector<Panel> panels,
                     std::vector<std::size_t> sphere_of_panel, std::vector<double> voltages)
    : vertices_(std::move(vertices)),
      panels_(std::move(panels)),
      sphere_of_panel_(std::move(sphere_of_panel)),
      voltages_(std::move(voltages)) {
    if (panels_.empty()) throw GeometryError("mesh has no panels");
    if (sphere_of_panel_.size() != panels_.size())
        throw GeometryError("sphere assignment does not cover every panel");
    for (std::size_t i = 0; i < panels_.size(); ++i) {
        const auto& p = panels_[i];
        for (auto v : p.vertices)
            if (v >= vertices_.size())
                throw GeometryError("panel " + std::to_string(i) + " references a missing vertex");
        if (!(p.area > 0.0))
            throw GeometryError("panel " + std::to_string(i) + " has non-positive area");
        if (sphere_of_panel_[i] >= voltages_.size())
            throw GeometryError("panel " + std::to_string(i) + " belongs to an unknown sphere");
    }
}

double PanelMesh::total_area() const {
    double sum = 0.0;
    for (const auto& p : panels_) sum += p.area;
    return sum;
}

SphereLayout default_layout(std::size_t count, int refinement, double spacing, double radius) {
    SphereLayout layout;
    layout.radius = radius;
    layout.refinement = refinement;
    for (std::size_t s = 0; s < count; ++s) {
        layout.centers.push_back({spacing * static_cast<double>(s), 0.0, 0.0});
        layout.voltages.push_back(1.0);
    }
    return layout;
}

PanelMesh build_sphere_mesh(const SphereLayout& layout) {
    const auto& centers = layout.centers;
    if (centers.empty()) throw GeometryError("at least one sphere is required");
    if (layout.voltages.size() != centers.size())
        throw GeometryError("need one voltage per sphere");
    if (!(layout.radius > 0.0)) throw GeometryError("sphere radius must be positive");
    if (layout.refinement < 0) throw GeometryError("refinement must be non-negative");
    for (std::size_t a = 0; a < centers.size(); ++a)
        for (std::size_t b = a + 1; b < centers.size(); ++b)
            if (!(norm(sub(centers[a], centers[b])) > 2.0 * layout.radius))
                throw GeometryError("spheres " + std::to_string(a) + " and " + std::to_string(b) +
                                    " intersect");

    // 20 * 4^r per sphere, checked before any allocation
    std::size_t per_sphere = 20;
    for (int r = 0; r < layout.refinement; ++r) {
        if (per_sphere > layout.max_panels) break;
        per_sphere *= 4;
    }
    if (per_sphere > layout.max_panels || per_sphere * centers.size() > layout.max_panels)
        throw SizeError("mesh would exceed " + std::to_string(layout.max_panels) + " panels");

    std::vector<Vec3> unit_verts;
    std::vector<Face> unit_faces;
    unit_icosphere(layout.refinement, unit_verts, unit_faces);

    std::vector<Vec3> vertices;
    std::vector<Panel> panels;
    std::vector<std::size_t> owner;
    vertices.reserve(unit_verts.size() * centers.size());
    panels.reserve(unit_faces.size() * centers.size());
    owner.reserve(unit_faces.size() * centers.size());

    for (std::size_t s = 0; s < centers.size(); ++s) {
        const std::size_t base = vertices.size();
        for (const auto& u : unit_verts)
            vertices.push_back({centers[s][0] + layout.radius * u[0],
                                centers[s][1] + layout.radius * u[1],
                                centers[s][2] + layout.radius * u[2]});
        for (const auto& f : unit_faces) {
            Panel p;
            p.vertices = {base + f[0], base + f[1], base + f[2]};
            const Vec3& a = vertices[p.vertices[0]];
            const Vec3& b = vertices[p.vertices[1]];
            const Vec3& c = vertices[p.vertices[2]];
            for (int k = 0; k < 3; ++k) p.centroid[k] = (a[k] + b[k] + c[k]) / 3.0;
            p.area = 0.5 * norm(cross(sub(b, a), sub(c, a)));
            panels.push_back(p);
            owner.push_back(s);
        }
    }
    return PanelMesh(std::move(vertices), std::move(panels), std::move(owner), layout.voltages);
}

double kernel_entry(const PanelMesh& mesh, std::size_t i, std::size_t j) {
    const Panel& pi = mesh.panel(i);
    if (i == j) return std::sqrt(pi.area / std::numbers::pi) / 2.0;
    const Panel& pj = mesh.panel(j);
    const double r = norm(sub(pi.centroid, pj.centroid));
    if (r == 0.0)
        throw SingularityError("panels " + std::to_string(i) + " and " + std::to_string(j) +
                               " share a centroid");
    return pj.area / (4.0 * std::numbers::pi * r);
}

std::vector<double> right_hand_side(const PanelMesh& mesh) {
    std::vector<double> b(mesh.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = mesh.voltages()[mesh.sphere_of(i)];
    return b;
}

DenseMatrix assemble_dense(const PanelMesh& mesh, std::size_t cap) {
    const std::size_t n = mesh.size();
    if (n > cap)
        throw SizeError("dense assembly of N = " + std::to_string(n) + " exceeds cap " +
                        std::to_string(cap));
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = kernel_entry(mesh, i, j);
    return a;
}

void write_mesh(std::ostream& out, const PanelMesh& mesh) {
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const Panel& p = mesh.panel(i);
        out << p.centroid[0] << ' ' << p.centroid[1] << ' ' << p.centroid[2] << ' ' << p.area
            << ' ' << mesh.sphere_of(i) << '\n';
    }
    out.precision(old_precision);
}

}  // namespace hmx
