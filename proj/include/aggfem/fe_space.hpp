#pragma once

#include <aggfem/diffusion_law.hpp>
#include <aggfem/geometry.hpp>
#include <aggfem/kernel.hpp>
#include <aggfem/mesh.hpp>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aggfem {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// One finite value per mesh node: the coefficients of a continuous P1
/// function. The mesh must outlive the field.
class NodalField {
 public:
  NodalField(const Mesh& mesh, Vector values) : mesh_(&mesh), values_(std::move(values)) {
    if (values_.size() != mesh.num_nodes()) {
      throw std::invalid_argument("NodalField: " + std::to_string(values_.size()) +
                                  " values for a mesh with " + std::to_string(mesh.num_nodes()) +
                                  " nodes");
    }
    if (!values_.allFinite()) throw std::invalid_argument("NodalField: non-finite value");
  }

  static NodalField constant(const Mesh& mesh, double c) {
    return NodalField(mesh, Vector::Constant(mesh.num_nodes(), c));
  }
  static NodalField zeros(const Mesh& mesh) { return constant(mesh, 0.0); }

  const Mesh& mesh() const { return *mesh_; }
  const Vector& values() const { return values_; }
  double operator[](int i) const { return values_[i]; }
  int size() const { return static_cast<int>(values_.size()); }

  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }

  /// Value of the P1 function at a point of element e, from barycentric weights.
  double eval_in_element(int e, Vec2 x) const {
    const Triangle& t = mesh_->element(e);
    const ElementGeometry& g = mesh_->element_geometry(e);
    double v = 0.0;
    for (int i = 0; i < 3; ++i) {
      v += values_[t[i]] * (1.0 / 3.0 + dot(g.grad_basis[i], x - g.barycenter));
    }
    return v;
  }

  /// Constant gradient on element e. Written in terms of value differences
  /// so that it is exactly zero where the field is constant.
  Vec2 gradient(int e) const {
    const Triangle& t = mesh_->element(e);
    const ElementGeometry& g = mesh_->element_geometry(e);
    const double v0 = values_[t[0]];
    return g.grad_basis[1] * (values_[t[1]] - v0) + g.grad_basis[2] * (values_[t[2]] - v0);
  }

 private:
  const Mesh* mesh_;
  Vector values_;
};

/// Diagonal of the lumped mass matrix, m_a = integral of phi_a.
struct LumpedMass {
  Vector m;

  double total() const { return m.sum(); }
  /// Lumped integral sum_a m_a v_a.
  double integrate(const Vector& v) const { return m.dot(v); }
};

inline LumpedMass lumped_mass(const Mesh& mesh) {
  LumpedMass out{Vector::Zero(mesh.num_nodes())};
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double third = mesh.element_geometry(e).area / 3.0;
    for (int v : mesh.element(e)) out.m[v] += third;
  }
  return out;
}

/// S[a][b] = integral of grad(phi_a).grad(phi_b).
inline SparseMatrix stiffness(const Mesh& mesh) {
  std::vector<Triplet> trips;
  trips.reserve(9 * static_cast<std::size_t>(mesh.num_elements()));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Triangle& t = mesh.element(e);
    const ElementGeometry& g = mesh.element_geometry(e);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        trips.emplace_back(t[a], t[b], g.area * dot(g.grad_basis[a], g.grad_basis[b]));
      }
    }
  }
  SparseMatrix s(mesh.num_nodes(), mesh.num_nodes());
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

/// The nodal cap used by the truncation operator.
class TruncationBounds {
 public:
  explicit TruncationBounds(double cap) : cap_(cap) {
    if (!(cap >= 0.0) || !std::isfinite(cap)) {
      throw std::invalid_argument("TruncationBounds: cap must be finite and >= 0");
    }
  }
  double cap() const { return cap_; }

 private:
  double cap_;
};

/// Clamps every nodal value to [0, B].
inline NodalField truncate(const NodalField& field, const TruncationBounds& bounds) {
  return NodalField(field.mesh(), field.values().cwiseMax(0.0).cwiseMin(bounds.cap()));
}

/// B = exp(T ||Laplacian K||_inf ||rho0||_L1) ||rho0||_Linf, with the lumped
/// L1 norm and the largest nodal value.
template <class Kernel>
TruncationBounds compute_B_Linf(const Kernel& kernel, const NodalField& rho0, double T) {
  if (!(T >= 0.0)) throw std::invalid_argument("compute_B_Linf: T must be >= 0");
  const double l1 = lumped_mass(rho0.mesh()).integrate(rho0.values().cwiseAbs());
  const double linf = std::max(0.0, rho0.max());
  return TruncationBounds(std::exp(T * kernel_norms(kernel).sup_lapK * l1) * linf);
}

/// Nodal interpolant of f composed with the field.
inline NodalField nodal_map(const NodalField& field, const std::function<double(double)>& f) {
  Vector out(field.size());
  for (int i = 0; i < field.size(); ++i) {
    out[i] = f(field[i]);
    if (!std::isfinite(out[i])) {
      throw std::domain_error("nodal_map: non-finite result at node " + std::to_string(i));
    }
  }
  return NodalField(field.mesh(), std::move(out));
}

struct FieldNorms {
  double lumped_l2 = 0.0;
  double l2 = 0.0;
  double l1_lumped = 0.0;
  double linf_nodal = 0.0;
  double mass_integral = 0.0;
};

/// Consistent-mass L2 norm squared, exact for P1:
/// int_E v^2 = |E| / 12 ((sum v_i)^2 + sum v_i^2).
inline double l2_norm_squared(const Mesh& mesh, const Vector& v) {
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Triangle& t = mesh.element(e);
    const double a = v[t[0]], b = v[t[1]], c = v[t[2]];
    const double s = a + b + c;
    sum += mesh.element_geometry(e).area / 12.0 * (s * s + a * a + b * b + c * c);
  }
  return sum;
}

inline FieldNorms norms(const NodalField& field, const LumpedMass& mass) {
  const Vector& v = field.values();
  if (mass.m.size() != v.size()) throw std::invalid_argument("norms: field and mass size differ");
  FieldNorms n;
  n.lumped_l2 = std::sqrt(mass.m.dot(v.cwiseAbs2()));
  n.l2 = std::sqrt(l2_norm_squared(field.mesh(), v));
  n.l1_lumped = mass.m.dot(v.cwiseAbs());
  n.linf_nodal = v.cwiseAbs().maxCoeff();
  n.mass_integral = mass.m.dot(v);
  return n;
}

/// Per-element diagonal of the secant diffusion tensor.
struct SecantDiagonal {
  double d11 = 0.0;
  double d22 = 0.0;
};

/// Chord slopes of A along x and y between the incenter and the points
/// offset from it by half the inradius. Zero when the two values coincide.
inline SecantDiagonal secant_diagonal(const NodalField& field, int e, const DiffusionLaw& law) {
  const ElementGeometry& g = field.mesh().element_geometry(e);
  const double half_r = 0.5 * g.inradius;
  const std::array<Vec2, 2> offsets{Vec2{half_r, 0.0}, Vec2{0.0, half_r}};
  const double v0 = field.eval_in_element(e, g.incenter);
  const double a0 = law(v0);
  const Vec2 grad = field.gradient(e);
  std::array<double, 2> d{};
  for (int j = 0; j < 2; ++j) {
    const Vec2 x = g.incenter + offsets[j];
    for (int i = 0; i < 3; ++i) {
      // Barycentric coordinate of x; a disk of radius r around the incenter
      // is inside E, so this cannot be negative beyond roundoff.
      if (1.0 / 3.0 + dot(g.grad_basis[i], x - g.barycenter) < -1e-12) {
        throw std::logic_error("secant_diagonal: sample point outside element " + std::to_string(e));
      }
    }
    const double vj = v0 + dot(grad, offsets[j]);
    d[j] = vj != v0 ? std::max(0.0, (law(vj) - a0) / (vj - v0)) : 0.0;
  }
  return {d[0], d[1]};
}

/// Matrix of u -> (D(field) grad u, grad .), rows = test node, columns = trial node.
inline SparseMatrix assemble_secant_diffusion(const Mesh& mesh, const NodalField& field,
                                              const DiffusionLaw& law) {
  std::vector<Triplet> trips;
  trips.reserve(9 * static_cast<std::size_t>(mesh.num_elements()));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const SecantDiagonal d = secant_diagonal(field, e, law);
    if (d.d11 == 0.0 && d.d22 == 0.0) continue;
    const Triangle& t = mesh.element(e);
    const ElementGeometry& g = mesh.element_geometry(e);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const Vec2 ga = g.grad_basis[a];
        const Vec2 gb = g.grad_basis[b];
        trips.emplace_back(t[a], t[b], g.area * (d.d11 * gb.x * ga.x + d.d22 * gb.y * ga.y));
      }
    }
  }
  SparseMatrix out(mesh.num_nodes(), mesh.num_nodes());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

/// C[a][b] = sum_E int_E phi_b (grad w . grad phi_a), with int_E phi_b = |E| / 3.
/// Rows are test nodes, so every column sums to zero.
inline SparseMatrix assemble_convection(const Mesh& mesh, const NodalField& w) {
  std::vector<Triplet> trips;
  trips.reserve(9 * static_cast<std::size_t>(mesh.num_elements()));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Vec2 gw = w.gradient(e);
    if (gw.x == 0.0 && gw.y == 0.0) continue;
    const Triangle& t = mesh.element(e);
    const ElementGeometry& g = mesh.element_geometry(e);
    const double third = g.area / 3.0;
    for (int a = 0; a < 3; ++a) {
      const double flux = third * dot(gw, g.grad_basis[a]);
      for (int b = 0; b < 3; ++b) trips.emplace_back(t[a], t[b], flux);
    }
  }
  SparseMatrix out(mesh.num_nodes(), mesh.num_nodes());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace aggfem
