#pragma once

#include <aggfem/diffusion_law.hpp>
#include <aggfem/fe_space.hpp>
#include <aggfem/kernel.hpp>
#include <aggfem/solver.hpp>

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace aggfem {

struct EnergyRecord {
  double t = 0.0;
  /// ||rho^n||_h^2 + sum_{m<=n} (||rho^m - rho^{m-1}||_h^2 + k h^gamma ||grad rho^m||^2
  ///                             + k ||grad I_h A_T(rho^m)||^2)
  double energy = 0.0;
  /// exp(T ||rho^0||_L1 ||K||_W2inf) ||rho^0||_h^2
  double bound = 0.0;
  bool within_bound = true;
};

/// Accumulates the discrete energy one state at a time. The first observed
/// state must be the initial one; later states must be consecutive steps.
class EnergyMonitor {
 public:
  template <class Kernel>
  EnergyMonitor(const DiffusionLaw& law, const Kernel& kernel, const NodalField& rho0,
                const TimeStepConfig& config)
      : mass_(lumped_mass(rho0.mesh())),
        stiffness_(stiffness(rho0.mesh())),
        law_(law.truncated(compute_B_Linf(kernel, rho0, config.T_final).cap())),
        k_(config.k),
        stab_(config.k * std::pow(rho0.mesh().h(), config.gamma)) {
    const double l1 = mass_.integrate(rho0.values().cwiseAbs());
    bound_ = std::exp(config.T_final * l1 * kernel_norms(kernel).w2inf()) *
             mass_.integrate(rho0.values().cwiseAbs2());
  }

  EnergyRecord observe(const SolverState& state) {
    const Vector& v = state.rho.values();
    if (previous_) {
      const Vector dv = v - *previous_;
      const Vector a = nodal_map(state.rho, [this](double s) { return law_(s); }).values();
      dissipation_ += mass_.integrate(dv.cwiseAbs2()) + stab_ * v.dot(stiffness_ * v) +
                      k_ * a.dot(stiffness_ * a);
    }
    previous_ = v;
    EnergyRecord r;
    r.t = state.t;
    r.energy = mass_.integrate(v.cwiseAbs2()) + dissipation_;
    r.bound = bound_;
    r.within_bound = r.energy <= bound_ * (1.0 + 1e-12);
    return r;
  }

 private:
  LumpedMass mass_;
  SparseMatrix stiffness_;
  DiffusionLaw law_;
  double k_;
  double stab_;
  double bound_ = 0.0;
  double dissipation_ = 0.0;
  std::optional<Vector> previous_;
};

/// Energy series over a retained history (initial state first).
template <class Kernel>
std::vector<EnergyRecord> energy_monitor(std::span<const SolverState> history, const DiffusionLaw& law,
                                         const Kernel& kernel, const TimeStepConfig& config) {
  if (history.empty()) return {};
  EnergyMonitor monitor(law, kernel, history.front().rho, config);
  std::vector<EnergyRecord> out;
  out.reserve(history.size());
  for (const SolverState& s : history) out.push_back(monitor.observe(s));
  return out;
}

}  // namespace aggfem
