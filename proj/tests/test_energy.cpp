#include <aggfem/energy.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace aggfem;

TEST(Energy, ZeroDataGivesZeroEnergy) {
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 3);
  TimeStepConfig c;
  c.T_final = 0.5;
  const DiffusionLaw law = DiffusionLaw::power_law(0.1, 3);
  std::vector<SolverState> history;
  RunSinks sinks;
  sinks.on_snapshot = [&](const SolverState& s) { history.push_back(s); };
  c.snapshot_every = 1;
  run(m, law, GaussianKernel{}, NodalField::zeros(m), c, sinks);
  ASSERT_EQ(history.size(), 6u);
  for (const EnergyRecord& r : energy_monitor(history, law, GaussianKernel{}, c)) {
    EXPECT_EQ(r.energy, 0.0);
    EXPECT_EQ(r.bound, 0.0);
    EXPECT_TRUE(r.within_bound);
  }
}

TEST(Energy, PureDiffusionStepDoesNotIncreaseLumpedNorm) {
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 6);
  const LumpedMass lm = lumped_mass(m);
  const NodalField rho0 = init_from_function(m, box_function({-2, 2, -1, 3}, 1.0));
  TimeStepConfig c;
  const StepResult r = step(SolverState{0.0, rho0, 0}, m, DiffusionLaw::power_law(0.1, 3), ZeroKernel{}, lm,
                            stiffness(m), c);
  EXPECT_LE(lm.integrate(r.state.rho.values().cwiseAbs2()), lm.integrate(rho0.values().cwiseAbs2()));
}

TEST(Energy, BoundHoldsOnShortAggregationRun) {
  const Mesh m = build_structured_acute_mesh({-4, 4, -4, 4}, 4);
  const NodalField rho0 = init_from_function(m, box_function({-3, 3, -3, 3}, 0.25));
  TimeStepConfig c;
  c.T_final = 2.0;
  const DiffusionLaw law = DiffusionLaw::power_law(0.1, 3);
  EnergyMonitor monitor(law, GaussianKernel{}, rho0, c);
  double previous = 0.0;
  RunSinks sinks;
  c.snapshot_every = 1;
  int observed = 0;
  sinks.on_snapshot = [&](const SolverState& s) {
    const EnergyRecord r = monitor.observe(s);
    EXPECT_TRUE(r.within_bound) << "t = " << r.t;
    if (observed > 0) {
      EXPECT_GT(r.energy, 0.0);
    }
    previous = r.energy;
    ++observed;
  };
  run(m, law, GaussianKernel{}, rho0, c, sinks);
  EXPECT_EQ(observed, 21);
  EXPECT_GT(previous, 0.0);
}
