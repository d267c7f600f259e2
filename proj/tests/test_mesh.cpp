#include "oracles.hpp"

#include <aggfem/mesh.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace aggfem;

namespace {

Mesh single_triangle(Vec2 a, Vec2 b, Vec2 c) { return Mesh({a, b, c}, {Triangle{0, 1, 2}}); }

Mesh equilateral() { return single_triangle({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}); }

Mesh unit_right_triangle() { return single_triangle({0, 0}, {1, 0}, {0, 1}); }

}  // namespace

TEST(StructuredMesh, SingleMacroHasFourteenTrianglesAndTwelveNodes) {
  const Mesh m = build_structured_acute_mesh({0, 1, 0, 1}, 1);
  EXPECT_EQ(m.num_elements(), 14);
  EXPECT_EQ(m.num_nodes(), 12);
  const int boundary = static_cast<int>(std::count(m.boundary_flags().begin(), m.boundary_flags().end(), true));
  EXPECT_EQ(boundary, 8);
}

TEST(StructuredMesh, EulerCharacteristicOfADisk) {
  for (int n : {1, 2, 3, 5}) {
    const Mesh m = build_structured_acute_mesh({0, 1, 0, 1}, n);
    const long v = m.num_nodes();
    const long e = static_cast<long>(m.num_edges());
    const long t = m.num_elements();
    EXPECT_EQ(v - e + t, 1) << "n = " << n;
    EXPECT_EQ(t, 14L * n * n);
    // corners + edge midpoints + 4 interior per macro
    EXPECT_EQ(v, (n + 1L) * (n + 1) + 2L * n * (n + 1) + 4L * n * n);
  }
}

TEST(StructuredMesh, ReproducesReportedSizesAtN120) {
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 120);
  EXPECT_EQ(m.num_elements(), 201600);
  EXPECT_EQ(m.num_nodes(), 101281);
  const AcutenessReport r = verify_acuteness(m);
  EXPECT_TRUE(r.ok);
  EXPECT_GT(r.beta, 0.0);
  EXPECT_LT(r.max_angle, std::numbers::pi / 2);
}

TEST(StructuredMesh, AreasTileTheRectangle) {
  const Rectangle box{-1.2, 1.2, -1, 1};
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 7);
  EXPECT_NEAR(m.area(), 64.0, 64.0 * 1e-12);
  for (const auto& g : m.geometry()) EXPECT_GT(g.area, 0.0);
  const Mesh m2 = build_structured_acute_mesh(box, 5);
  EXPECT_NEAR(m2.area(), box.area(), box.area() * 1e-12);
}

TEST(StructuredMesh, NodesAreOrderedByYThenX) {
  const Mesh m = build_structured_acute_mesh({-1, 2, 0, 3}, 4);
  for (int i = 1; i < m.num_nodes(); ++i) {
    const Vec2 a = m.node(i - 1), b = m.node(i);
    EXPECT_TRUE(a.y < b.y || (a.y == b.y && a.x < b.x)) << "at node " << i;
  }
}

TEST(StructuredMesh, NoDuplicateNodes) {
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 6);
  const double tol = 1e-9 * m.h();
  for (int i = 0; i < m.num_nodes(); ++i) {
    for (int j = i + 1; j < m.num_nodes(); ++j) {
      ASSERT_GT(norm(m.node(i) - m.node(j)), tol) << i << " " << j;
    }
  }
}

TEST(StructuredMesh, BoundaryFlagsMatchRectangleEdges) {
  const Rectangle box{-4, 4, -4, 4};
  const Mesh m = build_structured_acute_mesh(box, 3);
  for (int i = 0; i < m.num_nodes(); ++i) {
    const Vec2 p = m.node(i);
    const bool on_edge = p.x == box.x_min || p.x == box.x_max || p.y == box.y_min || p.y == box.y_max;
    EXPECT_EQ(m.is_boundary(i), on_edge) << i;
  }
}

TEST(StructuredMesh, MeshSizeIsAboutHalfTheMacroEdge) {
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 120);
  const double half_macro = 8.0 / 240.0;
  EXPECT_GE(m.h(), half_macro);
  EXPECT_LT(m.h(), 1.2 * half_macro);
}

TEST(StructuredMesh, MildlyAnisotropicRectangleStaysAcute) {
  const Mesh m = build_structured_acute_mesh({0, 1.2, 0, 1}, 3);
  EXPECT_TRUE(verify_acuteness(m).ok);
}

TEST(StructuredMesh, StronglyStretchedRectangleIsRejected) {
  EXPECT_THROW(build_structured_acute_mesh({0, 4, 0, 1}, 2), std::runtime_error);
}

TEST(StructuredMesh, RejectsBadInput) {
  EXPECT_THROW(build_structured_acute_mesh({0, 1, 0, 1}, 0), std::invalid_argument);
  EXPECT_THROW(build_structured_acute_mesh({0, 0, 0, 1}, 2), std::invalid_argument);
  EXPECT_THROW(build_structured_acute_mesh({0, 1, 1, 0}, 2), std::invalid_argument);
}

TEST(MeshConstruction, RejectsInvalidConnectivity) {
  EXPECT_THROW(Mesh({{0, 0}, {1, 0}, {0, 1}}, {Triangle{0, 2, 1}}), std::invalid_argument);
  EXPECT_THROW(Mesh({{0, 0}, {1, 0}, {0, 1}}, {Triangle{0, 1, 3}}), std::invalid_argument);
  EXPECT_THROW(Mesh({{0, 0}, {1, 0}, {0, 1}}, {Triangle{0, 1, 1}}), std::invalid_argument);
  EXPECT_THROW(Mesh({{0, 0}, {1, 0}, {2, 0}}, {Triangle{0, 1, 2}}), std::invalid_argument);
}

TEST(Acuteness, EquilateralTriangle) {
  const AcutenessReport r = verify_acuteness(equilateral());
  EXPECT_NEAR(r.max_angle, std::numbers::pi / 3, 1e-14);
  EXPECT_TRUE(r.ok);
}

TEST(Acuteness, RightTriangleIsNotStrictlyAcute) {
  const AcutenessReport r = verify_acuteness(unit_right_triangle());
  EXPECT_NEAR(r.max_angle, std::numbers::pi / 2, 1e-14);
  EXPECT_NEAR(r.beta, 0.0, 1e-14);
  EXPECT_FALSE(r.ok);
}

TEST(ElementGeometry, BasisGradientsSumToZeroAndMatchLinearSolve) {
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 3);
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementGeometry& g = m.element_geometry(e);
    const Vec2 sum = g.grad_basis[0] + g.grad_basis[1] + g.grad_basis[2];
    EXPECT_LE(norm(sum) * g.diameter, 1e-12);
    const auto ref = oracle::basis_gradients(m, e);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(g.grad_basis[i].x, ref[i].x(), 1e-12 / g.diameter);
      EXPECT_NEAR(g.grad_basis[i].y, ref[i].y(), 1e-12 / g.diameter);
    }
  }
}

TEST(ElementGeometry, GradientIsInwardNormalOverHeight) {
  const Mesh m = build_structured_acute_mesh({0, 1, 0, 1}, 2);
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementGeometry& g = m.element_geometry(e);
    const auto& t = m.element(e);
    for (int i = 0; i < 3; ++i) {
      const Vec2 p = m.node(t[i]);
      const Vec2 q = m.node(t[(i + 1) % 3]);
      const Vec2 r = m.node(t[(i + 2) % 3]);
      const Vec2 edge = r - q;
      // Inward normal of the opposite edge points towards vertex i.
      Vec2 n{edge.y, -edge.x};
      n *= 1.0 / norm(n);
      if (dot(n, p - q) < 0) n = -n;
      const Vec2 expected = n * (1.0 / g.heights[i]);
      EXPECT_NEAR(g.grad_basis[i].x, expected.x, 1e-12 / g.diameter);
      EXPECT_NEAR(g.grad_basis[i].y, expected.y, 1e-12 / g.diameter);
    }
  }
}

TEST(ElementGeometry, IncenterInsideAndInradiusPositive) {
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 4);
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementGeometry& g = m.element_geometry(e);
    EXPECT_GT(g.inradius, 0.0);
    for (int i = 0; i < 3; ++i) {
      const double lambda = 1.0 / 3.0 + dot(g.grad_basis[i], g.incenter - g.barycenter);
      EXPECT_GT(lambda, 0.0);
      // The incenter is exactly r away from each edge.
      EXPECT_NEAR(lambda * g.heights[i], g.inradius, 1e-12);
    }
  }
}

TEST(MeshConstants, EquilateralTriangleStiffnessEntries) {
  const Mesh m = equilateral();
  const ElementGeometry& g = m.element_geometry(0);
  EXPECT_NEAR(g.area * dot(g.grad_basis[0], g.grad_basis[1]), -1.0 / (2.0 * std::sqrt(3.0)), 1e-14);
  const MeshConstants c = estimate_mesh_constants(m);
  EXPECT_NEAR(c.c_neg_lower, 1.0 / (2.0 * std::sqrt(3.0)), 1e-14);
  EXPECT_NEAR(c.quasi_uniformity, 1.0, 1e-14);
}

TEST(MeshConstants, RightTriangleHasZeroLowerBound) {
  const MeshConstants c = estimate_mesh_constants(unit_right_triangle());
  EXPECT_NEAR(c.c_neg_lower, 0.0, 1e-15);
}

TEST(MeshConstants, GeneratedMeshHasPositiveConstants) {
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 40);
  const MeshConstants c = estimate_mesh_constants(m);
  EXPECT_GT(c.c_neg_lower, 0.0);
  EXPECT_GT(c.shape_regularity, 0.0);
  EXPECT_GE(c.quasi_uniformity, 1.0);
  // Scale invariance in 2D: the same constants on a coarser mesh.
  const MeshConstants c1 = estimate_mesh_constants(build_structured_acute_mesh({-4, 4, -4, 4}, 1));
  EXPECT_NEAR(c.c_neg_lower, c1.c_neg_lower, 1e-10);
  EXPECT_NEAR(c.shape_regularity, c1.shape_regularity, 1e-10);
}

TEST(MeshNeighbors, SymmetricAndSorted) {
  const Mesh m = build_structured_acute_mesh({0, 1, 0, 1}, 2);
  const auto adj = m.node_neighbors();
  for (int i = 0; i < m.num_nodes(); ++i) {
    EXPECT_TRUE(std::is_sorted(adj[i].begin(), adj[i].end()));
    for (int j : adj[i]) {
      EXPECT_TRUE(std::binary_search(adj[j].begin(), adj[j].end(), i));
    }
  }
}
