#pragma once

#include <aggfem/geometry.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aggfem {

using Triangle = std::array<int, 3>;

/// Per-element P1 data. Vertex i of the element is opposite edge i.
struct ElementGeometry {
  double area = 0.0;
  double diameter = 0.0;
  Vec2 barycenter;
  Vec2 incenter;
  double inradius = 0.0;
  /// Constant gradient of the hat function of each vertex on this element.
  std::array<Vec2, 3> grad_basis;
  /// Distance from each vertex to the line through its opposite edge.
  std::array<double, 3> heights{};
};

inline ElementGeometry compute_element_geometry(Vec2 p0, Vec2 p1, Vec2 p2) {
  const std::array<Vec2, 3> p{p0, p1, p2};
  const double twice_area = cross(p1 - p0, p2 - p0);
  ElementGeometry g;
  g.area = 0.5 * twice_area;
  g.barycenter = (p0 + p1 + p2) * (1.0 / 3.0);

  std::array<double, 3> len{};
  for (int i = 0; i < 3; ++i) {
    const Vec2 pj = p[(i + 1) % 3];
    const Vec2 pk = p[(i + 2) % 3];
    len[i] = norm(pj - pk);
    g.grad_basis[i] = Vec2{pj.y - pk.y, pk.x - pj.x} * (1.0 / twice_area);
    g.heights[i] = twice_area / len[i];
  }
  const double perimeter = len[0] + len[1] + len[2];
  g.diameter = std::max({len[0], len[1], len[2]});
  g.incenter = (p0 * len[0] + p1 * len[1] + p2 * len[2]) * (1.0 / perimeter);
  g.inradius = twice_area / perimeter;
  return g;
}

/// Interior angles at vertices 0, 1, 2 of a triangle.
inline std::array<double, 3> interior_angles(Vec2 p0, Vec2 p1, Vec2 p2) {
  const std::array<Vec2, 3> p{p0, p1, p2};
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const Vec2 u = p[(i + 1) % 3] - p[i];
    const Vec2 v = p[(i + 2) % 3] - p[i];
    out[i] = std::atan2(std::abs(cross(u, v)), dot(u, v));
  }
  return out;
}

/// Conforming triangulation of a planar region. Immutable after construction.
class Mesh {
 public:
  Mesh(std::vector<Vec2> nodes, std::vector<Triangle> elements)
      : nodes_(std::move(nodes)), elements_(std::move(elements)) {
    if (nodes_.empty() || elements_.empty()) {
      throw std::invalid_argument("Mesh: needs at least one node and one element");
    }
    for (const Vec2& p : nodes_) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw std::invalid_argument("Mesh: non-finite node coordinate");
      }
    }
    const int n = num_nodes();
    geometry_.reserve(elements_.size());
    for (std::size_t e = 0; e < elements_.size(); ++e) {
      const Triangle& t = elements_[e];
      for (int v : t) {
        if (v < 0 || v >= n) {
          throw std::invalid_argument("Mesh: element " + std::to_string(e) +
                                      " references node " + std::to_string(v) +
                                      " out of range");
        }
      }
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
        throw std::invalid_argument("Mesh: element " + std::to_string(e) +
                                    " has repeated vertices");
      }
      ElementGeometry g = compute_element_geometry(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]);
      if (!(g.area > 0.0)) {
        throw std::invalid_argument("Mesh: element " + std::to_string(e) +
                                    " has non-positive signed area");
      }
      h_ = std::max(h_, g.diameter);
      area_ += g.area;
      geometry_.push_back(g);
    }
    mark_boundary();
  }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<Triangle>& elements() const { return elements_; }
  const std::vector<ElementGeometry>& geometry() const { return geometry_; }
  const std::vector<bool>& boundary_flags() const { return boundary_; }

  Vec2 node(int i) const { return nodes_[i]; }
  const Triangle& element(int e) const { return elements_[e]; }
  const ElementGeometry& element_geometry(int e) const { return geometry_[e]; }
  bool is_boundary(int i) const { return boundary_[i]; }

  /// Largest element diameter.
  double h() const { return h_; }
  /// Sum of element areas.
  double area() const { return area_; }

  /// Sorted list of edge-adjacent nodes for every node.
  std::vector<std::vector<int>> node_neighbors() const {
    std::vector<std::vector<int>> adj(nodes_.size());
    for (const Triangle& t : elements_) {
      for (int i = 0; i < 3; ++i) {
        adj[t[i]].push_back(t[(i + 1) % 3]);
        adj[t[i]].push_back(t[(i + 2) % 3]);
      }
    }
    for (auto& list : adj) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return adj;
  }

  /// Number of distinct edges.
  std::size_t num_edges() const { return sorted_edges().size(); }

 private:
  std::vector<std::pair<int, int>> sorted_edges() const {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(3 * elements_.size());
    for (const Triangle& t : elements_) {
      for (int i = 0; i < 3; ++i) {
        const int a = t[i];
        const int b = t[(i + 1) % 3];
        edges.emplace_back(std::min(a, b), std::max(a, b));
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
  }

  // An edge is on the boundary iff exactly one element uses it.
  void mark_boundary() {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(3 * elements_.size());
    for (const Triangle& t : elements_) {
      for (int i = 0; i < 3; ++i) {
        const int a = t[i];
        const int b = t[(i + 1) % 3];
        edges.emplace_back(std::min(a, b), std::max(a, b));
      }
    }
    std::sort(edges.begin(), edges.end());
    boundary_.assign(nodes_.size(), false);
    for (std::size_t i = 0; i < edges.size();) {
      std::size_t j = i + 1;
      while (j < edges.size() && edges[j] == edges[i]) ++j;
      if (j - i == 1) {
        boundary_[edges[i].first] = true;
        boundary_[edges[i].second] = true;
      }
      i = j;
    }
  }

  std::vector<Vec2> nodes_;
  std::vector<Triangle> elements_;
  std::vector<ElementGeometry> geometry_;
  std::vector<bool> boundary_;
  double h_ = 0.0;
  double area_ = 0.0;
};

struct AcutenessReport {
  double max_angle = 0.0;  ///< radians
  double beta = 0.0;       ///< pi/2 - max_angle
  bool ok = false;
};

inline AcutenessReport verify_acuteness(const Mesh& mesh) {
  AcutenessReport r;
  for (const Triangle& t : mesh.elements()) {
    const auto ang = interior_angles(mesh.node(t[0]), mesh.node(t[1]), mesh.node(t[2]));
    r.max_angle = std::max({r.max_angle, ang[0], ang[1], ang[2]});
  }
  r.beta = std::numbers::pi / 2 - r.max_angle;
  r.ok = r.beta > 0.0;
  return r;
}

struct MeshConstants {
  /// min over elements of -int_E grad(phi_i).grad(phi_j) (i != j) and int_E |grad(phi_i)|^2.
  double c_neg_lower = 0.0;
  /// min diam(inscribed ball) / h.
  double shape_regularity = 0.0;
  /// max h_E / min h_E.
  double quasi_uniformity = 0.0;
};

// In 2D the scaling factor h^(2-d) is 1.
inline MeshConstants estimate_mesh_constants(const Mesh& mesh) {
  MeshConstants c;
  c.c_neg_lower = std::numeric_limits<double>::infinity();
  c.shape_regularity = std::numeric_limits<double>::infinity();
  double h_min = std::numeric_limits<double>::infinity();
  double h_max = 0.0;
  for (const ElementGeometry& g : mesh.geometry()) {
    for (int i = 0; i < 3; ++i) {
      c.c_neg_lower = std::min(c.c_neg_lower, g.area * dot(g.grad_basis[i], g.grad_basis[i]));
      for (int j = i + 1; j < 3; ++j) {
        c.c_neg_lower = std::min(c.c_neg_lower, -g.area * dot(g.grad_basis[i], g.grad_basis[j]));
      }
    }
    c.shape_regularity = std::min(c.shape_regularity, 2.0 * g.inradius / mesh.h());
    h_min = std::min(h_min, g.diameter);
    h_max = std::max(h_max, g.diameter);
  }
  c.quasi_uniformity = h_max / h_min;
  return c;
}

namespace detail {

// Macroelement on the unit square. Outer ring (counterclockwise from the
// lower-left corner) on the half-lattice, then four interior vertices placed
// symmetrically about the center; the interior quadrilateral is a rhombus
// split along its short diagonal. Largest angle of the pattern is ~72.1 deg.
inline constexpr double kInnerNear = 0.331;
inline constexpr double kInnerSide = 0.623;

inline constexpr std::array<std::array<int, 2>, 8> kOuterLattice{{
    {0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};

inline constexpr std::array<Vec2, 4> kInner{{
    {kInnerNear, kInnerNear},
    {kInnerSide, 1.0 - kInnerSide},
    {1.0 - kInnerNear, 1.0 - kInnerNear},
    {1.0 - kInnerSide, kInnerSide}}};

// Local ids: 0..7 outer ring, 8..11 interior.
inline constexpr std::array<Triangle, 14> kMacroTriangles = [] {
  std::array<Triangle, 14> t{};
  int k = 0;
  for (int j = 0; j < 4; ++j) {
    const int inner = 8 + j;
    const int next_inner = 8 + (j + 1) % 4;
    const int before = (2 * j + 7) % 8;
    const int corner = 2 * j;
    const int after = 2 * j + 1;
    t[k++] = {before, corner, inner};
    t[k++] = {corner, after, inner};
    t[k++] = {inner, after, next_inner};
  }
  t[k++] = {8, 9, 11};
  t[k++] = {9, 10, 11};
  return t;
}();

}  // namespace detail

/// Splits [domain] into n_square x n_square macroelements of 14 acute
/// triangles each. Nodes are ordered lexicographically by (y, x). Throws if
/// the result is not strictly acute.
inline Mesh build_structured_acute_mesh(const Rectangle& domain, int n_square) {
  if (n_square < 1) {
    throw std::invalid_argument("build_structured_acute_mesh: n_square must be >= 1");
  }
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0) ||
      !std::isfinite(domain.width()) || !std::isfinite(domain.height())) {
    throw std::invalid_argument("build_structured_acute_mesh: degenerate rectangle");
  }
  const int n = n_square;
  const int lattice = 2 * n + 1;

  // Half-lattice coordinate; the last line is pinned to the exact bound.
  auto lattice_x = [&](int i) {
    return i == 2 * n ? domain.x_max : domain.x_min + domain.width() * i / (2.0 * n);
  };
  auto lattice_y = [&](int j) {
    return j == 2 * n ? domain.y_max : domain.y_min + domain.height() * j / (2.0 * n);
  };

  // Provisional numbering: half-lattice nodes (not both indices odd), then interior nodes.
  std::vector<Vec2> raw;
  std::vector<int> lattice_id(static_cast<std::size_t>(lattice) * lattice, -1);
  for (int j = 0; j < lattice; ++j) {
    for (int i = 0; i < lattice; ++i) {
      if (i % 2 == 1 && j % 2 == 1) continue;
      lattice_id[static_cast<std::size_t>(j) * lattice + i] = static_cast<int>(raw.size());
      raw.push_back({lattice_x(i), lattice_y(j)});
    }
  }
  const int interior_base = static_cast<int>(raw.size());
  for (int mj = 0; mj < n; ++mj) {
    for (int mi = 0; mi < n; ++mi) {
      for (const Vec2& q : detail::kInner) {
        raw.push_back({domain.x_min + domain.width() * (mi + q.x) / n,
                       domain.y_min + domain.height() * (mj + q.y) / n});
      }
    }
  }

  std::vector<Triangle> elements;
  elements.reserve(static_cast<std::size_t>(14) * n * n);
  for (int mj = 0; mj < n; ++mj) {
    for (int mi = 0; mi < n; ++mi) {
      std::array<int, 12> local{};
      for (int k = 0; k < 8; ++k) {
        const auto [di, dj] = detail::kOuterLattice[k];
        local[k] = lattice_id[static_cast<std::size_t>(2 * mj + dj) * lattice + (2 * mi + di)];
      }
      for (int k = 0; k < 4; ++k) {
        local[8 + k] = interior_base + 4 * (mj * n + mi) + k;
      }
      for (const Triangle& t : detail::kMacroTriangles) {
        elements.push_back({local[t[0]], local[t[1]], local[t[2]]});
      }
    }
  }

  // Renumber by (y, x); ties cannot occur since all points are distinct.
  std::vector<int> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (raw[a].y != raw[b].y) return raw[a].y < raw[b].y;
    if (raw[a].x != raw[b].x) return raw[a].x < raw[b].x;
    return a < b;
  });
  std::vector<int> new_id(raw.size());
  std::vector<Vec2> nodes(raw.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    new_id[order[k]] = static_cast<int>(k);
    nodes[k] = raw[order[k]];
  }
  for (Triangle& t : elements) {
    for (int& v : t) v = new_id[v];
  }

  Mesh mesh(std::move(nodes), std::move(elements));
  const AcutenessReport acute = verify_acuteness(mesh);
  if (!acute.ok) {
    throw std::runtime_error("build_structured_acute_mesh: generated mesh is not acute (max angle " +
                             std::to_string(acute.max_angle) + " rad)");
  }
  return mesh;
}

}  // namespace aggfem
