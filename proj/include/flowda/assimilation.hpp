#pragma once

#include <ostream>
#include <vector>

#include "flowda/newton.hpp"

namespace flowda {

enum class ControlKind { DirichletVelocity, NeumannPressure };

// Unknown boundary data. DirichletVelocity: two components per inlet node,
// corners pinned (absent from the vector). NeumannPressure: scalar nodal
// values of the traction datum along the inlet.
struct ControlVector {
  ControlKind kind = ControlKind::DirichletVelocity;
  Vec values;
};

struct CostWeights {
  double beta1 = 0.5;
  double beta2 = 1e-5;
};

// Velocity data on a set of observation sections: target coefficients
// (full-length vector, zero off-support) and the section mass matrix.
struct ObservationSet {
  std::vector<int> section_ids;
  std::vector<int> dofs;  // sorted observation velocity dofs
  Vec target;             // length N_u
  CsrMatrix mass;         // N_u x N_u, support on section nodes
};

struct OptimizerIterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double alpha = 0.0;
  int cost_evaluations = 0;  // cumulative
};

enum class OptimizerStatus { Converged, MaxIterations, LineSearchFailure };
std::string to_string(OptimizerStatus status);

struct OptimizerTrace {
  std::vector<OptimizerIterationRecord> records;
  OptimizerStatus status = OptimizerStatus::Converged;
  int iterations = 0;
  int cost_evaluations = 0;
};

void write_trace_csv(const OptimizerTrace& trace, std::ostream& out);

// Everything one reduced-space optimization needs. The regularizer is the
// inlet tangential-gradient stiffness on the control set (velocity control)
// or the scalar inlet stiffness (pressure control); the traction map is only
// used by the pressure control.
struct AssimilationProblem {
  const FeSpace* space = nullptr;
  const AssembledOperators* ops = nullptr;
  StabilizationParams stab;
  const ObservationSet* obs = nullptr;
  CostWeights weights;
  NewtonSettings newton;
  ControlKind kind = ControlKind::DirichletVelocity;
  CsrMatrix regularizer;
  CsrMatrix traction_map;

  int control_size() const;
};

struct CostEvaluation {
  double cost = 0.0;
  double tracking = 0.0;
  double regularization = 0.0;
  FlowState state;
  int newton_iterations = 0;
};

// Cost J = beta1 ||U - U_d||_M^2 + beta2 G' A G; the state comes from a full
// Newton solve with the control imposed (Dirichlet rows or inlet traction).
CostEvaluation evaluate_cost(const AssimilationProblem& problem,
                             const ControlVector& control,
                             const FlowState& warm_start);

// Exact gradient of the discrete cost by the adjoint of the state Jacobian.
Vec gradient(const AssimilationProblem& problem, const ControlVector& control,
             const FlowState& converged_state);

struct OptimizeResult {
  ControlVector control;
  FlowState state;
  OptimizerTrace trace;
  double cost = 0.0;
  double gradient_norm = 0.0;
};

// Reduced-space realization of the SQP loop: damped-BFGS model Hessian,
// Newton-eliminated state constraints, Armijo backtracking with alpha in
// (0,1]. Terminates when the gradient norm (the reduced KKT residual) drops
// below max(kkt_tol, kkt_tol_rel * initial norm).
OptimizeResult sqp_minimize(const AssimilationProblem& problem,
                            const ControlVector& initial, double kkt_tol,
                            int max_iterations, double kkt_tol_rel = 0.0);

OptimizeResult neumann_variant_solve(const AssimilationProblem& problem,
                                     const ControlVector& initial,
                                     double kkt_tol, int max_iterations,
                                     double kkt_tol_rel = 0.0);

// Mass-weighted L2 relative error ||u - u_ref||_M / ||u_ref||_M.
double relative_error(const Vec& u, const Vec& u_ref, const CsrMatrix& mass);

enum class ErrorRegion { Omega, GammaIn, OmegaPart };
double relative_error_region(const FeSpace& space, const Vec& u,
                             const Vec& u_ref, ErrorRegion region,
                             const std::vector<int>& section_ids = {});

}  // namespace flowda
