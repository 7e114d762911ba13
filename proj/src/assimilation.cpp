#include "flowda/assimilation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "flowda/csv.hpp"
#include "flowda/log.hpp"

namespace flowda {

std::string to_string(OptimizerStatus status) {
  switch (status) {
    case OptimizerStatus::Converged: return "converged";
    case OptimizerStatus::MaxIterations: return "max_iterations";
    case OptimizerStatus::LineSearchFailure: return "line_search_failure";
  }
  return "?";
}

void write_trace_csv(const OptimizerTrace& trace, std::ostream& out) {
  csv::write_row(out, {"iteration", "cost", "grad_norm", "alpha",
                       "cost_evals"});
  for (const auto& r : trace.records)
    csv::write_row(out, {csv::format(r.iteration), csv::format(r.cost),
                         csv::format(r.grad_norm), csv::format(r.alpha),
                         csv::format(r.cost_evaluations)});
}

int AssimilationProblem::control_size() const {
  return kind == ControlKind::DirichletVelocity
             ? space->n_control_dofs()
             : static_cast<int>(space->inlet_nodes.size());
}

namespace {

struct BoundaryCondition {
  DirichletData bc;
  Vec neumann_term;  // empty unless pressure control
  const Vec* neumann_ptr() const {
    return neumann_term.size() ? &neumann_term : nullptr;
  }
};

BoundaryCondition boundary_for(const AssimilationProblem& problem,
                               const ControlVector& control) {
  if (control.kind != problem.kind)
    throw ConfigError("control kind does not match the problem");
  if (control.values.size() != problem.control_size())
    throw NumericsError("control vector has length " +
                        std::to_string(control.values.size()) +
                        ", expected " +
                        std::to_string(problem.control_size()));
  BoundaryCondition out;
  if (problem.kind == ControlKind::DirichletVelocity) {
    out.bc = DirichletData::wall_and_inlet(*problem.space, control.values);
  } else {
    out.bc = DirichletData::wall_only(*problem.space);
    out.neumann_term = problem.traction_map.multiply(control.values);
  }
  return out;
}

}  // namespace

CostEvaluation evaluate_cost(const AssimilationProblem& problem,
                             const ControlVector& control,
                             const FlowState& warm_start) {
  const BoundaryCondition bc = boundary_for(problem, control);
  const NewtonResult solve =
      solve_newton(*problem.space, *problem.ops, problem.stab, bc.bc,
                   problem.newton, warm_start, bc.neumann_ptr());

  CostEvaluation out;
  out.state = solve.state;
  out.newton_iterations = solve.iterations;
  const Vec diff = out.state.velocity - problem.obs->target;
  out.tracking = problem.weights.beta1 * problem.obs->mass.bilinear(diff, diff);
  out.regularization =
      problem.weights.beta2 *
      problem.regularizer.bilinear(control.values, control.values);
  out.cost = out.tracking + out.regularization;
  return out;
}

Vec gradient(const AssimilationProblem& problem, const ControlVector& control,
             const FlowState& converged_state) {
  const BoundaryCondition bc = boundary_for(problem, control);
  const FeSpace& space = *problem.space;

  const CsrMatrix jac =
      jacobian(space, *problem.ops, problem.stab, converged_state, bc.bc,
               bc.neumann_ptr());
  const LuSolver lu(jac);

  Vec rhs = Vec::Zero(space.total_dofs());
  rhs.head(space.n_velocity_dofs) =
      2.0 * problem.weights.beta1 *
      problem.obs->mass.multiply(converged_state.velocity -
                                 problem.obs->target);
  const Vec adjoint = lu.solve_transpose(rhs);

  Vec grad =
      2.0 * problem.weights.beta2 * problem.regularizer.multiply(control.values);
  if (problem.kind == ControlKind::DirichletVelocity) {
    for (std::size_t k = 0; k < space.control_dofs.size(); ++k)
      grad[k] += adjoint[space.control_dofs[k]];
  } else {
    grad -= problem.traction_map.multiply_transpose(
        adjoint.head(space.n_velocity_dofs));
  }
  return grad;
}

OptimizeResult sqp_minimize(const AssimilationProblem& problem,
                            const ControlVector& initial, double kkt_tol,
                            int max_iterations, double kkt_tol_rel) {
  if (kkt_tol <= 0) throw ConfigError("optimizer: kkt_tol must be positive");
  if (initial.kind != problem.kind)
    throw ConfigError("optimizer: control kind mismatch");

  OptimizeResult result;
  result.control = initial;
  result.trace.status = OptimizerStatus::MaxIterations;

  int cost_evals = 0;
  auto try_evaluate = [&](const ControlVector& g, const FlowState& warm,
                          CostEvaluation& out) {
    ++cost_evals;
    try {
      out = evaluate_cost(problem, g, warm);
      return true;
    } catch (const SolverError&) {
      return false;  // trial rejected, the line search will halve
    }
  };

  CostEvaluation current;
  if (!try_evaluate(result.control, FlowState::zero(*problem.space), current))
    throw SolverError("optimizer: state solve failed at the initial control");

  Vec g = gradient(problem, result.control, current.state);
  const double g0_norm = g.norm();
  const double threshold = std::max(kkt_tol, kkt_tol_rel * g0_norm);
  const int n = static_cast<int>(g.size());

  result.cost = current.cost;
  result.gradient_norm = g0_norm;
  result.state = current.state;

  if (g0_norm <= threshold) {
    result.trace.status = OptimizerStatus::Converged;
    result.trace.cost_evaluations = cost_evals;
    return result;
  }

  // Model Hessian: identity scaled by the first gradient norm, kept positive
  // definite by Powell-damped BFGS updates.
  Eigen::MatrixXd hessian =
      Eigen::MatrixXd::Identity(n, n) * std::max(g0_norm, 1e-30);

  constexpr double armijo_c1 = 1e-4;
  constexpr double alpha_min = 1.0 / (1 << 25);

  for (int iter = 1; iter <= max_iterations; ++iter) {
    Vec direction = -hessian.ldlt().solve(g);
    double slope = g.dot(direction);
    if (!std::isfinite(slope) || slope >= 0) {
      hessian = Eigen::MatrixXd::Identity(n, n) * std::max(g.norm(), 1e-30);
      direction = -g / std::max(g.norm(), 1e-30);
      slope = g.dot(direction);
    }

    double alpha = 1.0;
    CostEvaluation trial;
    ControlVector trial_control = result.control;
    bool accepted = false;
    while (alpha >= alpha_min) {
      trial_control.values = result.control.values + alpha * direction;
      if (try_evaluate(trial_control, current.state, trial) &&
          trial.cost <= current.cost + armijo_c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      result.trace.status = OptimizerStatus::LineSearchFailure;
      break;
    }

    const Vec step = alpha * direction;
    const Vec g_new = gradient(problem, trial_control, trial.state);

    // Powell-damped BFGS update.
    const Vec bs = hessian * step;
    const double s_bs = step.dot(bs);
    Vec y = g_new - g;
    double sy = step.dot(y);
    if (s_bs > 0 && sy < 0.2 * s_bs) {
      const double theta = 0.8 * s_bs / (s_bs - sy);
      y = theta * y + (1.0 - theta) * bs;
      sy = step.dot(y);
    }
    if (s_bs > 0 && sy > 0) {
      hessian += (y * y.transpose()) / sy - (bs * bs.transpose()) / s_bs;
    }

    result.control = trial_control;
    current = trial;
    g = g_new;
    result.cost = current.cost;
    result.gradient_norm = g.norm();
    result.state = current.state;
    result.trace.records.push_back(
        {iter, current.cost, result.gradient_norm, alpha, cost_evals});
    result.trace.iterations = iter;
    log::record("optimizer_iter",
                {{"iteration", std::to_string(iter)},
                 {"cost", csv::format(current.cost)},
                 {"grad_norm", csv::format(result.gradient_norm)},
                 {"alpha", csv::format(alpha)}});

    if (result.gradient_norm <= threshold) {
      result.trace.status = OptimizerStatus::Converged;
      break;
    }
  }

  result.trace.cost_evaluations = cost_evals;
  return result;
}

OptimizeResult neumann_variant_solve(const AssimilationProblem& problem,
                                     const ControlVector& initial,
                                     double kkt_tol, int max_iterations,
                                     double kkt_tol_rel) {
  if (problem.kind != ControlKind::NeumannPressure)
    throw ConfigError("neumann_variant_solve requires a pressure control");
  return sqp_minimize(problem, initial, kkt_tol, max_iterations, kkt_tol_rel);
}

double relative_error(const Vec& u, const Vec& u_ref, const CsrMatrix& mass) {
  const double denom = mass.bilinear(u_ref, u_ref);
  if (denom <= 0)
    throw NumericsError("relative_error: reference field has zero norm");
  const Vec diff = u - u_ref;
  return std::sqrt(mass.bilinear(diff, diff) / denom);
}

double relative_error_region(const FeSpace& space, const Vec& u,
                             const Vec& u_ref, ErrorRegion region,
                             const std::vector<int>& section_ids) {
  CsrMatrix mass;
  switch (region) {
    case ErrorRegion::Omega: mass = assemble_velocity_mass(space); break;
    case ErrorRegion::GammaIn: mass = assemble_inlet_mass(space); break;
    case ErrorRegion::OmegaPart:
      mass = assemble_observation_mass(space, section_ids);
      break;
  }
  return relative_error(u, u_ref, mass);
}

}  // namespace flowda
