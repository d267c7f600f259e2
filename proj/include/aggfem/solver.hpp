#pragma once

#include <aggfem/diffusion_law.hpp>
#include <aggfem/fe_space.hpp>
#include <aggfem/kernel.hpp>
#include <aggfem/mesh.hpp>
#include <aggfem/nonlocal.hpp>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace aggfem {

struct TimeStepConfig {
  double k = 0.1;        ///< time step
  double gamma = 0.99;   ///< exponent of the h^gamma stabilization, in (0, 1)
  double fp_tol = 1e-3;  ///< fixed-point stop: L2 distance between iterates
  int fp_max_iters = 50;
  double lin_tol = 1e-10;  ///< relative residual of each linear solve
  double T_final = 150.0;
  bool truncate_in_convolution = false;
  bool truncate_in_diffusion = false;
  int snapshot_every = 0;              ///< 0 disables periodic snapshots
  std::vector<double> snapshot_times;  ///< extra snapshot times
  int workers = 1;                     ///< worker-count hint for the convolution
  int direct_solve_below = 5000;       ///< sparse LU below this many nodes

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (!(k > 0.0) || !std::isfinite(k)) fail("k: must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma: must lie in (0, 1)");
    if (!(fp_tol > 0.0)) fail("fp_tol: must be > 0");
    if (fp_max_iters < 1) fail("fp_max_iters: must be >= 1");
    if (!(lin_tol > 0.0)) fail("lin_tol: must be > 0");
    if (!(T_final >= 0.0) || !std::isfinite(T_final)) fail("T_final: must be finite and >= 0");
    if (snapshot_every < 0) fail("snapshot_every: must be >= 0");
    if (workers < 1) fail("workers: must be >= 1");
    if (direct_solve_below < 0) fail("direct_solve_below: must be >= 0");
  }

  /// Number of steps needed to reach T_final.
  long num_steps() const { return static_cast<long>(std::ceil(T_final / k - 1e-9)); }
};

struct SolverState {
  double t = 0.0;
  NodalField rho;
  long step_index = 0;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double l1 = 0.0;
  double linf = 0.0;
  double min = 0.0;
  int fp_iters = 0;
  double lin_residual = 0.0;
  bool fp_converged = true;
};

/// A linear solve failed during a time step.
class SolverError : public std::runtime_error {
 public:
  SolverError(long step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

inline DiagnosticsRecord describe(const SolverState& s, const LumpedMass& mass) {
  DiagnosticsRecord r;
  r.t = s.t;
  const Vector& v = s.rho.values();
  r.mass = mass.integrate(v);
  r.l1 = mass.integrate(v.cwiseAbs());
  r.linf = v.cwiseAbs().maxCoeff();
  r.min = v.minCoeff();
  return r;
}

/// Nodal sampling of a nonnegative function.
inline NodalField init_from_function(const Mesh& mesh, const std::function<double(Vec2)>& rho0_fn) {
  Vector v(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    v[i] = rho0_fn(mesh.node(i));
    if (!(v[i] >= 0.0) || !std::isfinite(v[i])) {
      throw std::invalid_argument("init_from_function: invalid sample " + std::to_string(v[i]) +
                                  " at node " + std::to_string(i));
    }
  }
  return NodalField(mesh, std::move(v));
}

/// value on the closed box, 0 outside. Points within 1e-12 (relative to the
/// box size) of the box boundary count as inside.
inline std::function<double(Vec2)> box_function(const Rectangle& box, double value) {
  const double tol = 1e-12 * std::max({1.0, box.width(), box.height()});
  return [box, value, tol](Vec2 p) {
    const bool inside = p.x >= box.x_min - tol && p.x <= box.x_max + tol &&
                        p.y >= box.y_min - tol && p.y <= box.y_max + tol;
    return inside ? value : 0.0;
  };
}

/// Dimensionless stability products, reported and never enforced.
struct ConditionReport {
  double q_solv = 0.0;   ///< k (1 + 1/h) ||K||_W2inf ||rho0||_L1
  double q_nonneg = 0.0; ///< h^(1-gamma) ||K||_W2inf ||rho0||_L1
};

template <class Kernel>
ConditionReport check_conditions(const Mesh& mesh, const Kernel& kernel, const NodalField& rho0,
                                 const TimeStepConfig& config) {
  const double h = mesh.h();
  const double kn = kernel_norms(kernel).w2inf();
  const double l1 = lumped_mass(mesh).integrate(rho0.values().cwiseAbs());
  return {config.k * (1.0 + 1.0 / h) * kn * l1, std::pow(h, 1.0 - config.gamma) * kn * l1};
}

struct StepResult {
  SolverState state;
  DiagnosticsRecord record;
  std::vector<std::string> warnings;
};

namespace detail {

struct LinearSolveOutcome {
  Vector x;
  double residual = 0.0;
  bool converged = false;
};

inline double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
  const double bn = b.norm();
  const double rn = (b - a * x).norm();
  return bn > 0.0 ? rn / bn : rn;
}

inline LinearSolveOutcome solve_linear(const SparseMatrix& a, const Vector& b, const Vector& guess,
                                       const TimeStepConfig& config) {
  LinearSolveOutcome out;
  if (b.norm() == 0.0) {
    out.x = Vector::Zero(b.size());
    out.converged = true;
    return out;
  }
  if (a.rows() < config.direct_solve_below) {
    Eigen::SparseMatrix<double> col = a;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(col);
    if (lu.info() != Eigen::Success) {
      out.x = guess;
      out.residual = std::numeric_limits<double>::infinity();
      return out;
    }
    out.x = lu.solve(b);
    out.residual = relative_residual(a, out.x, b);
    out.converged = out.residual <= config.lin_tol;
    return out;
  }
  Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> bicg;
  bicg.setTolerance(config.lin_tol);
  bicg.setMaxIterations(static_cast<Eigen::Index>(10.0 * std::sqrt(static_cast<double>(a.rows()))));
  bicg.compute(a);
  out.x = bicg.solveWithGuess(b, guess);
  out.residual = relative_residual(a, out.x, b);
  out.converged = bicg.info() == Eigen::Success || out.residual <= config.lin_tol;
  return out;
}

}  // namespace detail

/// Advances one time step. The convolution field is frozen at the old
/// density; the secant diffusion matrix is re-linearized at each fixed-point
/// iterate and the system
///
///   (M + k h^gamma S + k D(rho_i) - k C(w)) rho_{i+1} = M rho^n
///
/// is solved until two iterates are closer than fp_tol in L2.
template <RadialKernel K>
StepResult step(const SolverState& state, const Mesh& mesh, const DiffusionLaw& law,
                const K& kernel, const LumpedMass& mass, const SparseMatrix& S,
                const TimeStepConfig& config,
                const std::optional<TruncationBounds>& bounds = std::nullopt) {
  std::vector<std::string> warnings;
  DiagnosticsRecord rec;
  if ((config.truncate_in_convolution || config.truncate_in_diffusion) && !bounds) {
    throw std::invalid_argument("step: truncation enabled but no bounds supplied");
  }
  const long next_index = state.step_index + 1;
  if (state.rho.min() < 0.0) {
    warnings.push_back("step " + std::to_string(next_index) +
                              ": input density has negative nodal values (min " +
                              std::to_string(state.rho.min()) + ")");
  }

  const double k = config.k;
  const NodalField conv_input =
      config.truncate_in_convolution ? truncate(state.rho, *bounds) : state.rho;
  const NodalField w = convolve_at_nodes(mesh, conv_input, kernel, config.workers);

  SparseMatrix diag(mesh.num_nodes(), mesh.num_nodes());
  {
    std::vector<Triplet> trips;
    trips.reserve(mesh.num_nodes());
    for (int a = 0; a < mesh.num_nodes(); ++a) trips.emplace_back(a, a, mass.m[a]);
    diag.setFromTriplets(trips.begin(), trips.end());
  }
  const SparseMatrix base =
      diag + (k * std::pow(mesh.h(), config.gamma)) * S - k * assemble_convection(mesh, w);
  const Vector rhs = mass.m.cwiseProduct(state.rho.values());
  const DiffusionLaw used_law = config.truncate_in_diffusion ? law.truncated(bounds->cap()) : law;

  Vector iterate = state.rho.values();
  rec.fp_converged = false;
  for (int i = 0; i < config.fp_max_iters; ++i) {
    const SparseMatrix system =
        base + k * assemble_secant_diffusion(mesh, NodalField(mesh, iterate), used_law);
    detail::LinearSolveOutcome sol = detail::solve_linear(system, rhs, iterate, config);
    rec.lin_residual = std::max(rec.lin_residual, sol.residual);
    if (!sol.converged) {
      throw SolverError(next_index, "linear solve did not converge (relative residual " +
                                        std::to_string(sol.residual) + ")");
    }
    if (!sol.x.allFinite()) throw SolverError(next_index, "linear solve produced non-finite values");
    const double change = std::sqrt(l2_norm_squared(mesh, sol.x - iterate));
    iterate = std::move(sol.x);
    rec.fp_iters = i + 1;
    if (change < config.fp_tol) {
      rec.fp_converged = true;
      break;
    }
  }
  if (!rec.fp_converged) {
    warnings.push_back("step " + std::to_string(next_index) + ": fixed point not converged after " +
                              std::to_string(config.fp_max_iters) + " iterations");
  }

  SolverState next{static_cast<double>(next_index) * k, NodalField(mesh, std::move(iterate)),
                   next_index};
  const DiagnosticsRecord summary = describe(next, mass);
  rec.t = summary.t;
  rec.mass = summary.mass;
  rec.l1 = summary.l1;
  rec.linf = summary.linf;
  rec.min = summary.min;
  return {std::move(next), rec, std::move(warnings)};
}

template <class... Ks>
StepResult step(const SolverState& state, const Mesh& mesh, const DiffusionLaw& law,
                const std::variant<Ks...>& kernel, const LumpedMass& mass, const SparseMatrix& S,
                const TimeStepConfig& config,
                const std::optional<TruncationBounds>& bounds = std::nullopt) {
  return std::visit(
      [&](const auto& kk) { return step(state, mesh, law, kk, mass, S, config, bounds); }, kernel);
}

/// Callbacks fed by run(). Any of them may be empty.
struct RunSinks {
  std::function<void(const DiagnosticsRecord&)> on_record;
  std::function<void(const SolverState&)> on_snapshot;
  std::function<void(const std::string&)> on_warning;
  std::function<void()> flush;
};

struct RunResult {
  SolverState final_state;
  std::vector<DiagnosticsRecord> diagnostics;
};

inline bool is_snapshot_step(long step, const TimeStepConfig& config) {
  if (config.snapshot_every > 0 && step % config.snapshot_every == 0) return true;
  for (double t : config.snapshot_times) {
    if (std::llround(t / config.k) == step) return true;
  }
  return false;
}

/// Time loop from rho0 up to T_final. One diagnostics record is emitted for
/// the initial state and one per step.
template <class Kernel>
RunResult run(const Mesh& mesh, const DiffusionLaw& law, const Kernel& kernel, const NodalField& rho0,
              const TimeStepConfig& config, const RunSinks& sinks = {}) {
  config.validate();
  const LumpedMass mass = lumped_mass(mesh);
  const SparseMatrix S = stiffness(mesh);
  std::optional<TruncationBounds> bounds;
  if (config.truncate_in_convolution || config.truncate_in_diffusion) {
    bounds = compute_B_Linf(kernel, rho0, config.T_final);
  }

  RunResult result{SolverState{0.0, rho0, 0}, {}};
  auto emit = [&](const DiagnosticsRecord& r) {
    result.diagnostics.push_back(r);
    if (sinks.on_record) sinks.on_record(r);
  };
  try {
    emit(describe(result.final_state, mass));
    if (sinks.on_snapshot && is_snapshot_step(0, config)) sinks.on_snapshot(result.final_state);
    const long steps = config.num_steps();
    for (long n = 0; n < steps; ++n) {
      StepResult sr = step(result.final_state, mesh, law, kernel, mass, S, config, bounds);
      for (const auto& w : sr.warnings) {
        if (sinks.on_warning) sinks.on_warning(w);
      }
      result.final_state = std::move(sr.state);
      emit(sr.record);
      if (sinks.on_snapshot && is_snapshot_step(result.final_state.step_index, config)) {
        sinks.on_snapshot(result.final_state);
      }
    }
  } catch (...) {
    if (sinks.flush) sinks.flush();
    throw;
  }
  if (sinks.flush) sinks.flush();
  return result;
}

}  // namespace aggfem
