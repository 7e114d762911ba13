#include "flowda/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "flowda/quadrature.hpp"

namespace flowda {

double stabilization_delta(double mean_speed_sq, double diameter, double nu) {
  const double h2 = diameter * diameter;
  const double advective = 4.0 * mean_speed_sq / h2;
  const double diffusive = 16.0 * nu * nu / (h2 * h2);
  return 1.0 / std::sqrt(advective + diffusive);
}

namespace {

constexpr int kMaxNodes = 6;

struct BasisValues {
  std::array<double, kMaxNodes> n{};
  std::array<std::array<double, 2>, kMaxNodes> grad{};
};

// Lagrange basis on a triangle at barycentric coordinates `bary`.
// Vertex functions first, then (for P2) the nodes on edges (0,1),(1,2),(2,0).
BasisValues eval_basis(bool p2, const std::array<double, 3>& bary,
                       const TriGeometry& g) {
  BasisValues out;
  if (!p2) {
    for (int i = 0; i < 3; ++i) {
      out.n[i] = bary[i];
      out.grad[i] = g.grad_lambda[i];
    }
    return out;
  }
  for (int i = 0; i < 3; ++i) {
    out.n[i] = bary[i] * (2.0 * bary[i] - 1.0);
    const double f = 4.0 * bary[i] - 1.0;
    out.grad[i] = {f * g.grad_lambda[i][0], f * g.grad_lambda[i][1]};
  }
  for (int e = 0; e < 3; ++e) {
    const int a = e, b = (e + 1) % 3;
    out.n[3 + e] = 4.0 * bary[a] * bary[b];
    out.grad[3 + e] = {
        4.0 * (bary[a] * g.grad_lambda[b][0] + bary[b] * g.grad_lambda[a][0]),
        4.0 * (bary[a] * g.grad_lambda[b][1] + bary[b] * g.grad_lambda[a][1])};
  }
  return out;
}

struct EdgeBasis {
  std::array<double, 3> n{};
  std::array<double, 3> dt{};  // derivative w.r.t. the [0,1] parameter
};

EdgeBasis eval_edge_basis(bool p2, double t) {
  EdgeBasis out;
  if (!p2) {
    out.n = {1.0 - t, t, 0.0};
    out.dt = {-1.0, 1.0, 0.0};
    return out;
  }
  out.n = {(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)};
  out.dt = {4.0 * t - 3.0, 4.0 * t - 1.0, 4.0 - 8.0 * t};
  return out;
}

// Element velocity data at one quadrature point.
struct PointState {
  std::array<double, 2> u{};
  std::array<std::array<double, 2>, 2> grad{};  // grad[i][j] = du_i/dx_j
  std::array<double, 2> conv{};                 // (u . grad) u
};

PointState point_state(const BasisValues& basis, int n_nodes,
                       const std::array<std::array<double, 2>, kMaxNodes>& u) {
  PointState s;
  for (int m = 0; m < n_nodes; ++m)
    for (int i = 0; i < 2; ++i) {
      s.u[i] += basis.n[m] * u[m][i];
      s.grad[i][0] += u[m][i] * basis.grad[m][0];
      s.grad[i][1] += u[m][i] * basis.grad[m][1];
    }
  for (int i = 0; i < 2; ++i)
    s.conv[i] = s.grad[i][0] * s.u[0] + s.grad[i][1] * s.u[1];
  return s;
}

void require_stab_family(const FeSpace& space, const StabilizationParams& stab) {
  if (stab.enabled && space.family != ElementFamily::StabilizedP1P1)
    throw ConfigError(
        "stabilization is only defined for the equal-order P1-P1 pair");
}

}  // namespace

AssembledOperators assemble_linear_operators(const FeSpace& space, double nu,
                                             const StabilizationParams& stab) {
  if (nu <= 0) throw ConfigError("viscosity must be positive");
  require_stab_family(space, stab);

  const bool p2 = space.is_p2();
  const int nv = space.nodes_per_tri;
  const int n_tri = static_cast<int>(space.tri_nodes.size());

  Triplets tq(static_cast<std::size_t>(n_tri) * nv * nv * 2);
  Triplets tb(static_cast<std::size_t>(n_tri) * nv * 3 * 2);

  for (int t = 0; t < n_tri; ++t) {
    const auto& nodes = space.tri_nodes[t];
    const auto& g = space.tri_geometry[t];
    for (int q = 0; q < TriQuadrature::n_points; ++q) {
      const double w = TriQuadrature::weights[q] * g.area;
      const BasisValues basis = eval_basis(p2, TriQuadrature::points[q], g);
      for (int m = 0; m < nv; ++m) {
        for (int n = 0; n < nv; ++n) {
          const double kab = nu * w *
                             (basis.grad[m][0] * basis.grad[n][0] +
                              basis.grad[m][1] * basis.grad[n][1]);
          if (kab != 0.0)
            for (int c = 0; c < 2; ++c)
              tq.add(space.velocity_dof(nodes[m], c),
                     space.velocity_dof(nodes[n], c), kab);
        }
        for (int d = 0; d < 3; ++d) {
          const double lam = TriQuadrature::points[q][d];
          for (int k = 0; k < 2; ++k)
            tb.add(nodes[d], space.velocity_dof(nodes[m], k),
                   w * lam * basis.grad[m][k]);
        }
      }
    }
  }

  AssembledOperators ops;
  ops.nu = nu;
  ops.viscous = to_csr(tq, space.n_velocity_dofs, space.n_velocity_dofs);
  ops.divergence = to_csr(tb, space.n_pressure_dofs, space.n_velocity_dofs);
  ops.load = Vec::Zero(space.n_velocity_dofs);
  return ops;
}

ConvectionOperators assemble_convection(const FeSpace& space, const Vec& U,
                                        double nu,
                                        const StabilizationParams& stab) {
  require_stab_family(space, stab);
  if (U.size() != space.n_velocity_dofs)
    throw NumericsError("assemble_convection: velocity vector has length " +
                        std::to_string(U.size()));

  const bool p2 = space.is_p2();
  const int nv = space.nodes_per_tri;
  const int n_tri = static_cast<int>(space.tri_nodes.size());

  Triplets tn, tns, tbs, tps;
  tn.clear();

  std::array<std::array<double, 2>, kMaxNodes> u_local{};
  for (int t = 0; t < n_tri; ++t) {
    const auto& nodes = space.tri_nodes[t];
    const auto& g = space.tri_geometry[t];
    for (int m = 0; m < nv; ++m)
      for (int c = 0; c < 2; ++c)
        u_local[m][c] = U[space.velocity_dof(nodes[m], c)];

    double delta = 0.0;
    if (stab.enabled) {
      std::array<double, 2> ubar{};
      for (int m = 0; m < 3; ++m)
        for (int c = 0; c < 2; ++c) ubar[c] += u_local[m][c] / 3.0;
      delta = stabilization_delta(ubar[0] * ubar[0] + ubar[1] * ubar[1],
                                  g.diameter, nu);
      // pressure-Poisson block: constant over the element
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d)
          tps.add(nodes[c], nodes[d],
                  g.area * delta *
                      (g.grad_lambda[c][0] * g.grad_lambda[d][0] +
                       g.grad_lambda[c][1] * g.grad_lambda[d][1]));
    }

    for (int q = 0; q < TriQuadrature::n_points; ++q) {
      const double w = TriQuadrature::weights[q] * g.area;
      const BasisValues basis = eval_basis(p2, TriQuadrature::points[q], g);
      const PointState s = point_state(basis, nv, u_local);

      std::array<double, kMaxNodes> adv_test{};
      if (stab.enabled)
        for (int m = 0; m < nv; ++m)
          adv_test[m] = s.u[0] * basis.grad[m][0] + s.u[1] * basis.grad[m][1];

      for (int m = 0; m < nv; ++m)
        for (int n = 0; n < nv; ++n)
          for (int ci = 0; ci < 2; ++ci)
            for (int cj = 0; cj < 2; ++cj) {
              const double gij = s.grad[ci][cj];
              if (gij == 0.0) continue;
              tn.add(space.velocity_dof(nodes[m], ci),
                     space.velocity_dof(nodes[n], cj),
                     w * basis.n[m] * basis.n[n] * gij);
              if (stab.enabled)
                tns.add(space.velocity_dof(nodes[m], ci),
                        space.velocity_dof(nodes[n], cj),
                        w * delta * adv_test[m] * basis.n[n] * gij);
            }
      if (stab.enabled)
        for (int m = 0; m < nv; ++m)
          for (int d = 0; d < 3; ++d)
            for (int ci = 0; ci < 2; ++ci)
              tbs.add(space.velocity_dof(nodes[m], ci), nodes[d],
                      w * delta * g.grad_lambda[d][ci] * adv_test[m]);
    }
  }

  ConvectionOperators out;
  const int nu_dofs = space.n_velocity_dofs;
  const int np_dofs = space.n_pressure_dofs;
  out.convection = to_csr(tn, nu_dofs, nu_dofs);
  out.convection_supg = to_csr(tns, nu_dofs, nu_dofs);
  out.pressure_supg = to_csr(tbs, nu_dofs, np_dofs);
  out.pressure_stab = to_csr(tps, np_dofs, np_dofs);
  return out;
}

namespace {

// Shared 1D assembly over trace elements. `stiffness` selects d/ds products
// instead of values; entries go to (node, component) velocity dofs.
Triplets assemble_trace(const FeSpace& space,
                        const std::vector<TraceElement>& elements,
                        bool stiffness) {
  const bool p2 = space.is_p2();
  Triplets out;
  for (const auto& el : elements) {
    for (int q = 0; q < EdgeQuadrature::n_points; ++q) {
      const double w = EdgeQuadrature::weights[q] * el.length;
      const EdgeBasis basis = eval_edge_basis(p2, EdgeQuadrature::points[q]);
      for (int a = 0; a < el.n_nodes; ++a)
        for (int b = 0; b < el.n_nodes; ++b) {
          const double value =
              stiffness
                  ? w * (basis.dt[a] / el.length) * (basis.dt[b] / el.length)
                  : w * basis.n[a] * basis.n[b];
          for (int c = 0; c < 2; ++c)
            out.add(space.velocity_dof(el.nodes[a], c),
                    space.velocity_dof(el.nodes[b], c), value);
        }
    }
  }
  return out;
}

}  // namespace

CsrMatrix assemble_observation_mass(const FeSpace& space,
                                    const std::vector<int>& section_ids) {
  Triplets t;
  for (int id : section_ids) {
    const auto it = space.section_elements.find(id);
    if (it == space.section_elements.end())
      throw ConfigError("unknown observation section id " + std::to_string(id));
    t.append(assemble_trace(space, it->second, /*stiffness=*/false));
  }
  return to_csr(t, space.n_velocity_dofs, space.n_velocity_dofs);
}

CsrMatrix assemble_inlet_regularizer(const FeSpace& space) {
  const Triplets full =
      assemble_trace(space, space.inlet_elements, /*stiffness=*/true);
  // Restrict to the control set (corner rows/columns drop out).
  std::map<int, int> control_index;
  for (std::size_t k = 0; k < space.control_dofs.size(); ++k)
    control_index[space.control_dofs[k]] = static_cast<int>(k);
  Triplets restricted;
  const auto rows = full.rows();
  const auto cols = full.cols();
  const auto vals = full.values();
  for (std::size_t k = 0; k < full.size(); ++k) {
    const auto ri = control_index.find(rows[k]);
    const auto ci = control_index.find(cols[k]);
    if (ri != control_index.end() && ci != control_index.end())
      restricted.add(ri->second, ci->second, vals[k]);
  }
  const int ng = space.n_control_dofs();
  return to_csr(restricted, ng, ng);
}

namespace {

Triplets assemble_trace_scalar(const FeSpace& space, bool stiffness) {
  // Scalar 1D operator over all inlet nodes, in inlet-node order.
  std::map<int, int> inlet_index;
  for (std::size_t k = 0; k < space.inlet_nodes.size(); ++k)
    inlet_index[space.inlet_nodes[k]] = static_cast<int>(k);
  const bool p2 = space.is_p2();
  Triplets out;
  for (const auto& el : space.inlet_elements) {
    for (int q = 0; q < EdgeQuadrature::n_points; ++q) {
      const double w = EdgeQuadrature::weights[q] * el.length;
      const EdgeBasis basis = eval_edge_basis(p2, EdgeQuadrature::points[q]);
      for (int a = 0; a < el.n_nodes; ++a)
        for (int b = 0; b < el.n_nodes; ++b) {
          const double value =
              stiffness
                  ? w * (basis.dt[a] / el.length) * (basis.dt[b] / el.length)
                  : w * basis.n[a] * basis.n[b];
          out.add(inlet_index.at(el.nodes[a]), inlet_index.at(el.nodes[b]),
                  value);
        }
    }
  }
  return out;
}

}  // namespace

CsrMatrix assemble_inlet_scalar_stiffness(const FeSpace& space) {
  const int ns = static_cast<int>(space.inlet_nodes.size());
  return to_csr(assemble_trace_scalar(space, /*stiffness=*/true), ns, ns);
}

CsrMatrix assemble_inlet_traction_map(const FeSpace& space) {
  std::map<int, int> inlet_index;
  for (std::size_t k = 0; k < space.inlet_nodes.size(); ++k)
    inlet_index[space.inlet_nodes[k]] = static_cast<int>(k);
  const bool p2 = space.is_p2();
  const Mesh& mesh = *space.mesh;
  Triplets t;
  for (const auto& el : space.inlet_elements) {
    const auto& a = mesh.vertices[el.nodes[0]];
    const auto& b = mesh.vertices[el.nodes[1]];
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const std::array<double, 2> normal{dy / el.length, -dx / el.length};
    for (int q = 0; q < EdgeQuadrature::n_points; ++q) {
      const double w = EdgeQuadrature::weights[q] * el.length;
      const EdgeBasis basis = eval_edge_basis(p2, EdgeQuadrature::points[q]);
      for (int a_local = 0; a_local < el.n_nodes; ++a_local)
        for (int s_local = 0; s_local < el.n_nodes; ++s_local)
          for (int c = 0; c < 2; ++c)
            t.add(space.velocity_dof(el.nodes[a_local], c),
                  inlet_index.at(el.nodes[s_local]),
                  w * basis.n[a_local] * basis.n[s_local] * normal[c]);
    }
  }
  return to_csr(t, space.n_velocity_dofs,
                static_cast<int>(space.inlet_nodes.size()));
}

CsrMatrix assemble_velocity_mass(const FeSpace& space) {
  const bool p2 = space.is_p2();
  const int nv = space.nodes_per_tri;
  Triplets t;
  for (std::size_t k = 0; k < space.tri_nodes.size(); ++k) {
    const auto& nodes = space.tri_nodes[k];
    const auto& g = space.tri_geometry[k];
    for (int q = 0; q < TriQuadrature::n_points; ++q) {
      const double w = TriQuadrature::weights[q] * g.area;
      const BasisValues basis = eval_basis(p2, TriQuadrature::points[q], g);
      for (int m = 0; m < nv; ++m)
        for (int n = 0; n < nv; ++n) {
          const double value = w * basis.n[m] * basis.n[n];
          for (int c = 0; c < 2; ++c)
            t.add(space.velocity_dof(nodes[m], c),
                  space.velocity_dof(nodes[n], c), value);
        }
    }
  }
  return to_csr(t, space.n_velocity_dofs, space.n_velocity_dofs);
}

CsrMatrix assemble_inlet_mass(const FeSpace& space) {
  return to_csr(assemble_trace(space, space.inlet_elements, false),
                space.n_velocity_dofs, space.n_velocity_dofs);
}

DirichletData DirichletData::wall_and_inlet(const FeSpace& space,
                                            const Vec& control_values) {
  if (control_values.size() != space.n_control_dofs())
    throw NumericsError("control vector has length " +
                        std::to_string(control_values.size()) + ", expected " +
                        std::to_string(space.n_control_dofs()));
  DirichletData bc;
  bc.dofs = space.dirichlet_dofs_velocity_control;
  bc.values = Vec::Zero(bc.dofs.size());
  for (std::size_t k = 0; k < space.control_dofs.size(); ++k) {
    const auto it = std::lower_bound(bc.dofs.begin(), bc.dofs.end(),
                                     space.control_dofs[k]);
    bc.values[it - bc.dofs.begin()] = control_values[k];
  }
  return bc;
}

DirichletData DirichletData::wall_only(const FeSpace& space) {
  DirichletData bc;
  bc.dofs = space.dirichlet_dofs_wall_only;
  bc.values = Vec::Zero(bc.dofs.size());
  return bc;
}

SystemOutput assemble_system(const FeSpace& space,
                             const AssembledOperators& ops,
                             const StabilizationParams& stab, const Vec& U,
                             const Vec& P, const DirichletData& bc,
                             const Vec* neumann_term, bool want_jacobian) {
  require_stab_family(space, stab);
  const int n_u = space.n_velocity_dofs;
  const int n_p = space.n_pressure_dofs;
  const int n_total = n_u + n_p;
  if (U.size() != n_u || P.size() != n_p)
    throw NumericsError("assemble_system: state size mismatch");

  std::vector<char> constrained(n_u, 0);
  for (int d : bc.dofs) constrained[d] = 1;

  // Linear part from the precomputed operators.
  Vec r_u = ops.viscous.multiply(U) - ops.divergence.multiply_transpose(P);
  Vec r_p = ops.divergence.multiply(U);
  if (neumann_term) r_u += *neumann_term;

  const bool p2 = space.is_p2();
  const int nv = space.nodes_per_tri;
  const double nu = ops.nu;

  Triplets jt;
  if (want_jacobian) {
    // Copy the velocity-independent blocks, skipping constrained rows.
    const auto& q = ops.viscous;
    for (int i = 0; i < n_u; ++i) {
      if (constrained[i]) continue;
      for (int k = q.row_offsets()[i]; k < q.row_offsets()[i + 1]; ++k)
        jt.add(i, q.col_indices()[k], q.values()[k]);
    }
    const auto& b = ops.divergence;
    for (int c = 0; c < n_p; ++c)
      for (int k = b.row_offsets()[c]; k < b.row_offsets()[c + 1]; ++k) {
        const int j = b.col_indices()[k];
        const double v = b.values()[k];
        if (!constrained[j]) jt.add(j, n_u + c, -v);  // -B^T P in momentum
        jt.add(n_u + c, j, v);                        // B U in continuity
      }
  }

  std::array<std::array<double, 2>, kMaxNodes> u_local{};
  std::array<double, 3> p_local{};
  for (std::size_t t = 0; t < space.tri_nodes.size(); ++t) {
    const auto& nodes = space.tri_nodes[t];
    const auto& g = space.tri_geometry[t];
    for (int m = 0; m < nv; ++m)
      for (int c = 0; c < 2; ++c)
        u_local[m][c] = U[space.velocity_dof(nodes[m], c)];
    for (int d = 0; d < 3; ++d) p_local[d] = P[nodes[d]];

    std::array<double, 2> grad_p{};
    for (int d = 0; d < 3; ++d) {
      grad_p[0] += p_local[d] * g.grad_lambda[d][0];
      grad_p[1] += p_local[d] * g.grad_lambda[d][1];
    }

    double delta = 0.0;
    std::array<double, 2> ddelta_dubar{};
    if (stab.enabled) {
      std::array<double, 2> ubar{};
      for (int m = 0; m < 3; ++m)
        for (int c = 0; c < 2; ++c) ubar[c] += u_local[m][c] / 3.0;
      delta = stabilization_delta(ubar[0] * ubar[0] + ubar[1] * ubar[1],
                                  g.diameter, nu);
      const double f = -delta * delta * delta * 4.0 / (g.diameter * g.diameter);
      ddelta_dubar = {f * ubar[0], f * ubar[1]};

      // Continuity stabilization: area * delta * grad p . grad psi_c.
      for (int c = 0; c < 3; ++c) {
        const double gpc = grad_p[0] * g.grad_lambda[c][0] +
                           grad_p[1] * g.grad_lambda[c][1];
        r_p[nodes[c]] += g.area * delta * gpc;
        if (want_jacobian) {
          for (int d = 0; d < 3; ++d)
            jt.add(n_u + nodes[c], n_u + nodes[d],
                   g.area * delta *
                       (g.grad_lambda[c][0] * g.grad_lambda[d][0] +
                        g.grad_lambda[c][1] * g.grad_lambda[d][1]));
          const double gpc_area = g.area * gpc;
          for (int n = 0; n < 3; ++n)
            for (int cj = 0; cj < 2; ++cj)
              jt.add(n_u + nodes[c], space.velocity_dof(nodes[n], cj),
                     gpc_area * ddelta_dubar[cj] / 3.0);
        }
      }
    }

    for (int q = 0; q < TriQuadrature::n_points; ++q) {
      const double w = TriQuadrature::weights[q] * g.area;
      const BasisValues basis = eval_basis(p2, TriQuadrature::points[q], g);
      const PointState s = point_state(basis, nv, u_local);

      // u . grad N_n, used by both the SUPG test operator and the
      // convection linearization.
      std::array<double, kMaxNodes> u_dot_grad{};
      for (int m = 0; m < nv; ++m)
        u_dot_grad[m] = s.u[0] * basis.grad[m][0] + s.u[1] * basis.grad[m][1];

      const std::array<double, 2> strong_res{s.conv[0] + grad_p[0],
                                             s.conv[1] + grad_p[1]};

      for (int m = 0; m < nv; ++m) {
        for (int ci = 0; ci < 2; ++ci) {
          const int row = space.velocity_dof(nodes[m], ci);
          if (constrained[row]) continue;
          double contrib = s.conv[ci] * basis.n[m];
          if (stab.enabled) contrib += delta * strong_res[ci] * u_dot_grad[m];
          r_u[row] += w * contrib;
        }
      }

      if (!want_jacobian) continue;
      for (int m = 0; m < nv; ++m) {
        for (int ci = 0; ci < 2; ++ci) {
          const int row = space.velocity_dof(nodes[m], ci);
          if (constrained[row]) continue;
          for (int n = 0; n < nv; ++n) {
            for (int cj = 0; cj < 2; ++cj) {
              const int col = space.velocity_dof(nodes[n], cj);
              // d conv_ci / d u_(n,cj)
              double dconv = s.grad[ci][cj] * basis.n[n];
              if (ci == cj) dconv += u_dot_grad[n];
              double entry = dconv * basis.n[m];
              if (stab.enabled) {
                entry += delta * dconv * u_dot_grad[m];
                entry += delta * strong_res[ci] * basis.n[n] * basis.grad[m][cj];
                if (n < 3)
                  entry += (ddelta_dubar[cj] / 3.0) * strong_res[ci] *
                           u_dot_grad[m];
              }
              jt.add(row, col, w * entry);
            }
          }
          if (stab.enabled) {
            for (int d = 0; d < 3; ++d)
              jt.add(row, n_u + nodes[d],
                     w * delta * g.grad_lambda[d][ci] * u_dot_grad[m]);
          }
        }
      }
    }
  }

  // Dirichlet rows: residual (value - prescribed), identity in the Jacobian.
  for (std::size_t k = 0; k < bc.dofs.size(); ++k)
    r_u[bc.dofs[k]] = U[bc.dofs[k]] - bc.values[k];
  if (want_jacobian)
    for (int d : bc.dofs) jt.add(d, d, 1.0);

  SystemOutput out;
  out.residual.resize(n_total);
  out.residual.head(n_u) = r_u;
  out.residual.tail(n_p) = r_p;
  if (want_jacobian) out.jacobian = to_csr(jt, n_total, n_total);
  return out;
}

WallShear compute_wss(const FeSpace& space, const Vec& U, double mu) {
  if (U.size() != space.n_velocity_dofs)
    throw NumericsError("compute_wss: velocity vector size mismatch");
  const Mesh& mesh = *space.mesh;
  const bool p2 = space.is_p2();
  const int nv = space.nodes_per_tri;

  std::map<std::pair<int, int>, int> edge_owner;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edge_owner[{a, b}] = t;  // boundary edges appear once, so this is theirs
    }
  }

  WallShear out;
  std::array<std::array<double, 2>, kMaxNodes> u_local{};
  for (std::size_t be = 0; be < mesh.boundary_edges.size(); ++be) {
    const auto& edge = mesh.boundary_edges[be];
    if (edge.tag != BoundaryTag::Wall) continue;
    int a = edge.v0, b = edge.v1;
    if (a > b) std::swap(a, b);
    const int t = edge_owner.at({a, b});
    const auto& nodes = space.tri_nodes[t];
    const auto& g = space.tri_geometry[t];
    for (int m = 0; m < nv; ++m)
      for (int c = 0; c < 2; ++c)
        u_local[m][c] = U[space.velocity_dof(nodes[m], c)];

    // Midpoint barycentric coordinates: 1/2 on the edge vertices.
    std::array<double, 3> bary{0.0, 0.0, 0.0};
    for (int l = 0; l < 3; ++l)
      if (nodes[l] == edge.v0 || nodes[l] == edge.v1) bary[l] = 0.5;
    const BasisValues basis = eval_basis(p2, bary, g);
    const PointState s = point_state(basis, nv, u_local);

    const auto& pa = mesh.vertices[edge.v0];
    const auto& pb = mesh.vertices[edge.v1];
    const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
    const std::array<double, 2> tangent{(pb[0] - pa[0]) / len,
                                        (pb[1] - pa[1]) / len};
    const std::array<double, 2> normal{tangent[1], -tangent[0]};

    const std::array<double, 2> dudn{
        s.grad[0][0] * normal[0] + s.grad[0][1] * normal[1],
        s.grad[1][0] * normal[0] + s.grad[1][1] * normal[1]};
    const double shear = tangent[0] * dudn[0] + tangent[1] * dudn[1];

    out.boundary_edge_index.push_back(static_cast<int>(be));
    out.midpoints.push_back(mesh.edge_midpoint(edge));
    out.values.push_back(std::abs(mu * shear));
  }
  return out;
}

}  // namespace flowda
