#pragma once

#include <aggfem/fe_space.hpp>
#include <aggfem/mesh.hpp>
#include <aggfem/solver.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace aggfem {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline CheckResult check_mesh() {
  CheckResult r{"mesh", true, ""};
  for (int n : {1, 2, 3, 8}) {
    const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, n);
    const long euler = m.num_nodes() - static_cast<long>(m.num_edges()) + m.num_elements();
    const bool counts = m.num_elements() == 14 * n * n && euler == 1;
    const bool area = std::abs(m.area() - 64.0) <= 64.0 * 1e-12;
    const AcutenessReport a = verify_acuteness(m);
    if (!counts || !area || !a.ok) {
      r.pass = false;
      r.detail = "n_square " + std::to_string(n) + " failed";
      return r;
    }
    r.detail = "max angle " + sci(a.max_angle * 180.0 / std::numbers::pi) + " deg";
  }
  return r;
}

inline CheckResult check_assembly() {
  CheckResult r{"assembly", true, ""};
  double worst_off = -INFINITY, worst_row = 0.0;
  for (int n : {1, 4, 16}) {
    const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, n);
    const SparseMatrix s = stiffness(m);
    for (int k = 0; k < s.outerSize(); ++k) {
      double row = 0.0;
      for (SparseMatrix::InnerIterator it(s, k); it; ++it) {
        row += it.value();
        if (it.row() != it.col()) worst_off = std::max(worst_off, it.value());
      }
      worst_row = std::max(worst_row, std::abs(row));
    }
  }
  r.pass = worst_off <= 1e-14 && worst_row <= 1e-10;
  r.detail = "max off-diagonal " + sci(worst_off) + ", max |row sum| " + sci(worst_row);
  return r;
}

inline CheckResult check_conservation() {
  CheckResult r{"conservation", true, ""};
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 8);
  const LumpedMass lm = lumped_mass(m);
  const SparseMatrix s = stiffness(m);
  TimeStepConfig c;
  c.lin_tol = 1e-12;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, lowest = INFINITY;
  for (int trial = 0; trial < 10; ++trial) {
    Vector v(m.num_nodes());
    for (double& x : v) x = u(rng);
    const NodalField rho(m, v);
    const double before = lm.integrate(v);
    const StepResult out = step(SolverState{0.0, rho, 0}, m, DiffusionLaw::power_law(0.1, 3), GaussianKernel{},
                                lm, s, c);
    worst = std::max(worst, std::abs(lm.integrate(out.state.rho.values()) - before) / before);
    lowest = std::min(lowest, out.state.rho.min());
  }
  r.pass = worst <= 1e-8 && lowest >= -1e-10;
  r.detail = "max relative mass change " + sci(worst) + ", min value " + sci(lowest);
  return r;
}

}  // namespace detail

/// Quick structural checks: mesh validity, stiffness sign structure, one-step
/// mass conservation and nonnegativity.
inline std::vector<CheckResult> run_self_check() {
  return {detail::check_mesh(), detail::check_assembly(), detail::check_conservation()};
}

}  // namespace aggfem
