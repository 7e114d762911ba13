#include "flowda/newton.hpp"

#include <cmath>

#include "flowda/csv.hpp"
#include "flowda/log.hpp"

namespace flowda {

Vec residual(const FeSpace& space, const AssembledOperators& ops,
             const StabilizationParams& stab, const FlowState& state,
             const DirichletData& bc, const Vec* neumann_term) {
  return assemble_system(space, ops, stab, state.velocity, state.pressure, bc,
                         neumann_term, /*want_jacobian=*/false)
      .residual;
}

CsrMatrix jacobian(const FeSpace& space, const AssembledOperators& ops,
                   const StabilizationParams& stab, const FlowState& state,
                   const DirichletData& bc, const Vec* neumann_term) {
  return *assemble_system(space, ops, stab, state.velocity, state.pressure, bc,
                          neumann_term, /*want_jacobian=*/true)
              .jacobian;
}

namespace {

FlowState apply_update(const FeSpace& space, const FlowState& state,
                       const Vec& update, double step) {
  FlowState next;
  next.velocity =
      state.velocity + step * update.head(space.n_velocity_dofs);
  next.pressure =
      state.pressure + step * update.tail(space.n_pressure_dofs);
  return next;
}

}  // namespace

NewtonResult solve_newton(const FeSpace& space, const AssembledOperators& ops,
                          const StabilizationParams& stab,
                          const DirichletData& bc,
                          const NewtonSettings& settings,
                          const FlowState& initial, const Vec* neumann_term) {
  if (settings.tolerance <= 0)
    throw ConfigError("newton: tolerance must be positive");
  if (settings.max_iterations < 1)
    throw ConfigError("newton: max_iterations must be >= 1");

  NewtonResult result;
  result.state = initial;
  // Prescribed dofs are imposed exactly up front; the identity Jacobian rows
  // keep them there.
  for (std::size_t k = 0; k < bc.dofs.size(); ++k)
    result.state.velocity[bc.dofs[k]] = bc.values[k];

  Vec res = residual(space, ops, stab, result.state, bc, neumann_term);
  double res_norm = res.norm();
  result.trace.push_back({0, res_norm, 0.0});

  for (int it = 1; it <= settings.max_iterations; ++it) {
    if (res_norm <= settings.tolerance) {
      result.iterations = it - 1;
      return result;
    }

    const CsrMatrix jac =
        jacobian(space, ops, stab, result.state, bc, neumann_term);
    const LuSolver lu(jac);
    const Vec update = lu.solve(-res);

    // Residual-monotonicity backtracking.
    double step = settings.initial_step;
    FlowState trial;
    Vec trial_res;
    double trial_norm = 0.0;
    bool accepted = false;
    while (step >= settings.min_step) {
      trial = apply_update(space, result.state, update, step);
      trial_res = residual(space, ops, stab, trial, bc, neumann_term);
      trial_norm = trial_res.norm();
      if (trial_norm < res_norm) {
        accepted = true;
        break;
      }
      step *= settings.halving_factor;
    }
    if (!accepted)
      throw SolverError("newton: line search stagnated at iteration " +
                        std::to_string(it) + " (residual " +
                        csv::format(res_norm) + ")");

    result.state = std::move(trial);
    res = std::move(trial_res);
    res_norm = trial_norm;
    result.trace.push_back({it, res_norm, step});
    log::record("newton_iter", {{"iteration", std::to_string(it)},
                                {"residual", csv::format(res_norm)},
                                {"damping", csv::format(step)}});
  }
  if (res_norm <= settings.tolerance) {
    result.iterations = settings.max_iterations;
    return result;
  }
  throw SolverError("newton: no convergence in " +
                    std::to_string(settings.max_iterations) +
                    " iterations (residual " + csv::format(res_norm) + ")");
}

NewtonResult continuation_in_reynolds(const FeSpace& space,
                                      const StabilizationParams& stab,
                                      const DirichletData& bc,
                                      const NewtonSettings& settings,
                                      const std::vector<double>& nu_sequence,
                                      const FlowState& initial) {
  if (nu_sequence.empty())
    throw ConfigError("continuation: empty viscosity sequence");
  for (std::size_t k = 1; k < nu_sequence.size(); ++k)
    if (nu_sequence[k] >= nu_sequence[k - 1])
      throw ConfigError("continuation: viscosity sequence must decrease");

  NewtonResult result;
  result.state = initial;
  for (double nu : nu_sequence) {
    const AssembledOperators ops = assemble_linear_operators(space, nu, stab);
    result = solve_newton(space, ops, stab, bc, settings, result.state);
    log::record("continuation_step", {{"nu", csv::format(nu)},
                                      {"iterations",
                                       std::to_string(result.iterations)}});
  }
  return result;
}

}  // namespace flowda
