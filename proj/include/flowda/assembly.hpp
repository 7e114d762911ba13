#pragma once

#include <optional>
#include <vector>

#include "flowda/fe_space.hpp"
#include "flowda/sparse.hpp"

namespace flowda {

// GLS/SUPG stabilization controls. The per-element parameter is
//   delta_K = ((2|u|_K / h_K)^2 + (4 nu / h_K^2)^2)^(-1/2)
// with |u|_K the magnitude of the element's mean vertex velocity, recomputed
// at the current iterate. The same delta_K weights the pressure-Poisson term
// that replaces the 1/lambda penalty of the plain Galerkin-least-squares
// form. Only meaningful for the equal-order P1-P1 pair; Taylor-Hood runs
// with stabilization off.
struct StabilizationParams {
  bool enabled = false;

  static StabilizationParams for_family(ElementFamily family) {
    StabilizationParams p;
    p.enabled = family == ElementFamily::StabilizedP1P1;
    return p;
  }
};

double stabilization_delta(double mean_speed_sq, double diameter, double nu);

// Velocity-independent operators of the discrete state system.
//   viscous:    [Q]_ij = nu * int grad phi_i : grad phi_j      (N_u x N_u)
//   divergence: [B]_kj = int psi_k div phi_j                   (N_p x N_u)
//   load:       body force contribution (identically zero, f = 0)
struct AssembledOperators {
  CsrMatrix viscous;
  CsrMatrix divergence;
  Vec load;
  double nu = 1.0;
};

AssembledOperators assemble_linear_operators(const FeSpace& space, double nu,
                                             const StabilizationParams& stab);

// Velocity-dependent operators, including every stabilization block (the
// delta_K weighting makes them all depend on U). For P1 elements the
// Laplacian parts of the element residual and of the test operator vanish
// identically, so they are omitted rather than approximated.
//   convection:      [N(U)]      int phi_m phi_n du_ci/dx_cj
//   convection_supg: [script N]  SUPG test part, delta (u . grad phi_m)
//   pressure_supg:   [script B]  N_u x N_p coupling delta grad psi . (u.grad)phi
//   pressure_stab:   N_p x N_p, delta grad psi_c . grad psi_d (continuity row)
struct ConvectionOperators {
  CsrMatrix convection;
  CsrMatrix convection_supg;
  CsrMatrix pressure_supg;
  CsrMatrix pressure_stab;
};

ConvectionOperators assemble_convection(const FeSpace& space, const Vec& U,
                                        double nu,
                                        const StabilizationParams& stab);

// 1D mass matrix over the given observation sections, scattered into
// velocity dof indexing (N_u x N_u, support on section nodes only).
CsrMatrix assemble_observation_mass(const FeSpace& space,
                                    const std::vector<int>& section_ids);

// Tangential-gradient stiffness along the inlet on the control set
// (N_g x N_g in control-dof ordering; corner pinning makes it SPD).
CsrMatrix assemble_inlet_regularizer(const FeSpace& space);

// Scalar variants used by the pressure (Neumann) control:
// stiffness/mass over all inlet nodes (N_s x N_s in inlet-node order), and
// the traction map T with [T]_{(a,c),s} = int phi_s n_c phi_a ds so that the
// momentum residual gains +T g.
CsrMatrix assemble_inlet_scalar_stiffness(const FeSpace& space);
CsrMatrix assemble_inlet_traction_map(const FeSpace& space);

// Velocity mass matrices for L2 norms: full domain and inlet trace.
CsrMatrix assemble_velocity_mass(const FeSpace& space);
CsrMatrix assemble_inlet_mass(const FeSpace& space);

// Dirichlet data: constrained velocity dofs with prescribed values. Wall
// dofs are zero; inlet dofs carry the control (velocity-control problem)
// with the two corner nodes pinned to zero.
struct DirichletData {
  std::vector<int> dofs;  // sorted
  Vec values;             // aligned with dofs

  static DirichletData wall_and_inlet(const FeSpace& space,
                                      const Vec& control_values);
  static DirichletData wall_only(const FeSpace& space);
};

// Residual (and optionally the exact Jacobian) of the stabilized discrete
// system at (U, P), with Dirichlet rows replaced by (value - prescribed).
// `neumann_term`, when present, is added to the momentum residual (the
// inlet traction contribution T g of the pressure-control variant).
struct SystemOutput {
  Vec residual;
  std::optional<CsrMatrix> jacobian;
};
SystemOutput assemble_system(const FeSpace& space,
                             const AssembledOperators& ops,
                             const StabilizationParams& stab, const Vec& U,
                             const Vec& P, const DirichletData& bc,
                             const Vec* neumann_term, bool want_jacobian);

// Wall shear stress magnitude per wall edge: |mu * t . (grad u n)| evaluated
// from the element gradient at the edge midpoint.
struct WallShear {
  std::vector<int> boundary_edge_index;
  std::vector<std::array<double, 2>> midpoints;
  std::vector<double> values;  // N/m^2
};
WallShear compute_wss(const FeSpace& space, const Vec& U, double mu);

}  // namespace flowda
