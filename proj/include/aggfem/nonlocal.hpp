#pragma once

#include <aggfem/fe_space.hpp>
#include <aggfem/kernel.hpp>
#include <aggfem/mesh.hpp>
#include <aggfem/parallel.hpp>

#include <variant>
#include <vector>

namespace aggfem {

/// Nodal values of the midpoint-rule approximation of K * rho:
///
///   value(a) = sum_E K(a - b_E) rho(b_E) |E|,
///
/// where b_E is the barycenter and rho(b_E) the P1 value there. rho is
/// implicitly zero outside the mesh. Each node's sum runs over elements in
/// mesh order on a single worker, so the result does not depend on the
/// worker count.
template <RadialKernel K>
NodalField convolve_at_nodes(const Mesh& mesh, const NodalField& rho, const K& kernel,
                             int workers = 1) {
  // Elements with zero weight contribute an exact zero and are dropped.
  std::vector<Vec2> centers;
  std::vector<double> weights;
  centers.reserve(mesh.num_elements());
  weights.reserve(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Triangle& t = mesh.element(e);
    const ElementGeometry& g = mesh.element_geometry(e);
    const double mean = (rho[t[0]] + rho[t[1]] + rho[t[2]]) / 3.0;
    const double w = mean * g.area;
    if (w == 0.0) continue;
    centers.push_back(g.barycenter);
    weights.push_back(w);
  }

  Vector out = Vector::Zero(mesh.num_nodes());
  const std::size_t count = weights.size();
  parallel_for_ranges(static_cast<std::size_t>(mesh.num_nodes()), workers,
                      [&](std::size_t begin, std::size_t end) {
                        for (std::size_t a = begin; a < end; ++a) {
                          const Vec2 x = mesh.node(static_cast<int>(a));
                          double sum = 0.0;
                          for (std::size_t k = 0; k < count; ++k) {
                            sum += kernel.eval(x - centers[k]) * weights[k];
                          }
                          out[static_cast<Eigen::Index>(a)] = sum;
                        }
                      });
  return NodalField(mesh, std::move(out));
}

inline NodalField convolve_at_nodes(const Mesh& mesh, const NodalField& rho,
                                    const AnyKernel& kernel, int workers = 1) {
  return std::visit([&](const auto& k) { return convolve_at_nodes(mesh, rho, k, workers); },
                    kernel);
}

}  // namespace aggfem
