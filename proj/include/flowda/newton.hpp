#pragma once

#include <vector>

#include "flowda/assembly.hpp"

namespace flowda {

// Velocity and pressure coefficient vectors of one flow solution.
struct FlowState {
  Vec velocity;  // length N_u
  Vec pressure;  // length N_p

  static FlowState zero(const FeSpace& space) {
    return {Vec::Zero(space.n_velocity_dofs), Vec::Zero(space.n_pressure_dofs)};
  }
};

struct NewtonSettings {
  double tolerance = 1e-10;  // absolute residual 2-norm
  int max_iterations = 50;
  double initial_step = 1.0;
  double halving_factor = 0.5;
  double min_step = 1.0 / (1 << 20);
};

struct NewtonIterationRecord {
  int iteration = 0;
  double residual_norm = 0.0;
  double step = 0.0;  // damping factor applied at this iteration
};

struct NewtonResult {
  FlowState state;
  std::vector<NewtonIterationRecord> trace;
  int iterations = 0;
};

Vec residual(const FeSpace& space, const AssembledOperators& ops,
             const StabilizationParams& stab, const FlowState& state,
             const DirichletData& bc, const Vec* neumann_term = nullptr);

CsrMatrix jacobian(const FeSpace& space, const AssembledOperators& ops,
                   const StabilizationParams& stab, const FlowState& state,
                   const DirichletData& bc, const Vec* neumann_term = nullptr);

// Damped Newton with residual-norm backtracking. Throws SolverError on
// stagnation or iteration exhaustion.
NewtonResult solve_newton(const FeSpace& space, const AssembledOperators& ops,
                          const StabilizationParams& stab,
                          const DirichletData& bc,
                          const NewtonSettings& settings,
                          const FlowState& initial,
                          const Vec* neumann_term = nullptr);

// Warm-started sweep over a decreasing viscosity sequence; operators are
// reassembled per value. Returns the state at the final viscosity.
NewtonResult continuation_in_reynolds(const FeSpace& space,
                                      const StabilizationParams& stab,
                                      const DirichletData& bc,
                                      const NewtonSettings& settings,
                                      const std::vector<double>& nu_sequence,
                                      const FlowState& initial);

}  // namespace flowda
