#include "flowda/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "flowda/csv.hpp"
#include "flowda/log.hpp"
#include "flowda/quadrature.hpp"
#include "flowda/rng.hpp"

namespace flowda {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) { return csv::format(v); }

Mesh build_full_channel(const ScenarioConfig& cfg, double h,
                        const std::vector<double>& stations) {
  if (cfg.geometry.kind == ChannelSpec::Kind::Straight)
    return build_straight_channel(cfg.geometry, h, stations);
  return build_curved_channel(cfg.geometry, h, stations);
}

// Parabolic profile values on the control set (non-corner inlet nodes),
// directed along the inward normal, vanishing at the walls.
Vec parabolic_inlet_control(const FeSpace& space, double peak) {
  const Mesh& mesh = *space.mesh;
  const auto& c0 = mesh.vertices[space.inlet_corners[0]];
  const auto& c1 = mesh.vertices[space.inlet_corners[1]];
  const double width = std::hypot(c1[0] - c0[0], c1[1] - c0[1]);

  // Inward direction from the first inlet element's outward normal.
  const auto& el = space.inlet_elements.front();
  const auto& a = mesh.vertices[el.nodes[0]];
  const auto& b = mesh.vertices[el.nodes[1]];
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len = std::hypot(dx, dy);
  const std::array<double, 2> inward{-dy / len, dx / len};

  Vec control = Vec::Zero(space.n_control_dofs());
  for (std::size_t k = 0; k < space.control_nodes.size(); ++k) {
    const auto& p = space.node_coords[space.control_nodes[k]];
    const double xi = std::hypot(p[0] - c0[0], p[1] - c0[1]) / width;
    const double speed = peak * 4.0 * xi * (1.0 - xi);
    control[2 * k] = speed * inward[0];
    control[2 * k + 1] = speed * inward[1];
  }
  return control;
}

// Direct solve below Re ~ 150, geometric viscosity continuation above.
NewtonResult solve_with_continuation(const FeSpace& space,
                                     const StabilizationParams& stab,
                                     const AssembledOperators& ops, double nu,
                                     const DirichletData& bc,
                                     const NewtonSettings& settings,
                                     double reynolds) {
  if (reynolds <= 150.0)
    return solve_newton(space, ops, stab, bc, settings, FlowState::zero(space));
  std::vector<double> nus;
  for (double re = 100.0; re < reynolds; re *= 2.0)
    nus.push_back(nu * reynolds / re);
  nus.push_back(nu);
  return continuation_in_reynolds(space, stab, bc, settings, nus,
                                  FlowState::zero(space));
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
            c == '-' || c == '_')
               ? c
               : '_';
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::string join_sections(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += '+';
    out += std::to_string(ids[i]);
  }
  return out;
}

void run_pool(int n_points, int threads, const std::function<void(int)>& fn) {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  int n_workers = threads > 0 ? threads : std::max(1, hw);
  n_workers = std::min(n_workers, n_points);
  if (n_workers <= 1) {
    for (int i = 0; i < n_points; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n_points; i = next.fetch_add(1))
        fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

GroundTruth run_ground_truth(const ScenarioConfig& cfg, double nu_override) {
  const double nu = nu_override > 0 ? nu_override : cfg.nu;
  GroundTruth gt;
  gt.nu = nu;
  gt.mesh = std::make_shared<Mesh>(
      build_full_channel(cfg, cfg.working_ground_truth_h(), {}));
  gt.space = std::make_shared<FeSpace>(build_space(*gt.mesh, cfg.family));
  const StabilizationParams stab = StabilizationParams::for_family(cfg.family);
  const AssembledOperators ops =
      assemble_linear_operators(*gt.space, nu, stab);

  const Vec inflow = parabolic_inlet_control(*gt.space, cfg.inflow.peak);
  const DirichletData bc = DirichletData::wall_and_inlet(*gt.space, inflow);
  const double reynolds =
      (2.0 / 3.0) * cfg.inflow.peak * 2.0 * cfg.geometry.half_height / nu;
  const NewtonResult solve = solve_with_continuation(
      *gt.space, stab, ops, nu, bc, cfg.newton, reynolds);
  gt.state = solve.state;
  gt.interpolator = std::make_shared<FieldInterpolator>(*gt.space);
  log::record("ground_truth", {{"nu", fmt(nu)},
                               {"reynolds", fmt(reynolds)},
                               {"newton_iterations",
                                std::to_string(solve.iterations)}});
  return gt;
}

WorkingSetup build_working(const ScenarioConfig& cfg, const GroundTruth& gt,
                           double h, double nu) {
  WorkingSetup setup;
  setup.h = h;
  setup.nu = nu;
  Mesh full = build_full_channel(cfg, h, cfg.resolved_sections());
  setup.mesh = cfg.geometry.truncation_x ? truncate(full, cfg.geometry)
                                         : std::move(full);
  setup.space = build_space(setup.mesh, cfg.family);
  setup.stab = StabilizationParams::for_family(cfg.family);
  setup.ops = assemble_linear_operators(setup.space, nu, setup.stab);
  setup.truth_velocity =
      interpolate_velocity(*gt.interpolator, gt.state.velocity, setup.space);
  setup.truth_pressure =
      interpolate_pressure(*gt.interpolator, gt.state.pressure, setup.space);
  return setup;
}

ObservationSet extract_observations(const GroundTruth& gt,
                                    const WorkingSetup& setup,
                                    const std::vector<int>& section_ids,
                                    const NoiseSpec& noise) {
  const FeSpace& space = setup.space;
  ObservationSet obs;
  obs.section_ids = section_ids;
  obs.target = Vec::Zero(space.n_velocity_dofs);

  double u0 = 0.0;
  if (noise.enabled) {
    for (int n : space.inlet_nodes) {
      const double ux = setup.truth_velocity[space.velocity_dof(n, 0)];
      const double uy = setup.truth_velocity[space.velocity_dof(n, 1)];
      u0 = std::max(u0, std::hypot(ux, uy));
    }
  }
  const double sigma = noise.enabled ? noise.level * u0 / 3.0 : 0.0;
  const CounterRng rng(noise.seed);

  for (int id : section_ids) {
    const auto it = space.section_nodes.find(id);
    if (it == space.section_nodes.end())
      throw ConfigError("unknown observation section id " +
                        std::to_string(id));
    const auto& nodes = it->second;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      for (int c = 0; c < 2; ++c) {
        const int dof = space.velocity_dof(nodes[k], c);
        double value = setup.truth_velocity[dof];
        if (noise.enabled) {
          const std::uint64_t counter =
              (static_cast<std::uint64_t>(id) << 32) + 2 * k + c;
          value += sigma * rng.gaussian(counter);
        }
        obs.target[dof] = value;
        obs.dofs.push_back(dof);
      }
    }
  }
  std::sort(obs.dofs.begin(), obs.dofs.end());
  obs.dofs.erase(std::unique(obs.dofs.begin(), obs.dofs.end()),
                 obs.dofs.end());
  obs.mass = assemble_observation_mass(space, section_ids);
  return obs;
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  csv::write_row(out, {"label", "control", "family", "h", "reynolds", "beta1",
                       "beta2", "sections", "noise_seed", "re_omega",
                       "re_gamma_in", "re_omega_part", "re_state_vs_ref",
                       "re_control_vs_ref", "cost", "iterations",
                       "cost_evals", "status"});
  for (const auto& e : report.entries)
    csv::write_row(
        out,
        {e.label, e.control, e.family, fmt(e.h), fmt(e.reynolds),
         fmt(e.beta1), fmt(e.beta2), e.sections,
         e.noise_seed ? std::to_string(*e.noise_seed) : "",
         fmt(e.re_omega), fmt(e.re_gamma_in), fmt(e.re_omega_part),
         e.re_state_vs_ref ? fmt(*e.re_state_vs_ref) : "",
         e.re_control_vs_ref ? fmt(*e.re_control_vs_ref) : "", fmt(e.cost),
         csv::format(e.iterations), csv::format(e.cost_evaluations),
         e.status});
}

void write_timing_csv(const ExperimentReport& report, std::ostream& out) {
  csv::write_row(out, {"label", "wall_clock_s"});
  for (const auto& e : report.entries)
    csv::write_row(out, {e.label, fmt(e.wall_clock_s)});
}

AssimilationRun run_assimilation(const ScenarioConfig& cfg,
                                 const WorkingSetup& setup,
                                 const ObservationSet& obs,
                                 const CostWeights& weights,
                                 const std::string& label) {
  const auto t0 = std::chrono::steady_clock::now();

  AssimilationProblem problem;
  problem.space = &setup.space;
  problem.ops = &setup.ops;
  problem.stab = setup.stab;
  problem.obs = &obs;
  problem.weights = weights;
  problem.newton = cfg.newton;
  problem.kind = cfg.control_kind;
  if (cfg.control_kind == ControlKind::DirichletVelocity) {
    problem.regularizer = assemble_inlet_regularizer(setup.space);
  } else {
    problem.regularizer = assemble_inlet_scalar_stiffness(setup.space);
    problem.traction_map = assemble_inlet_traction_map(setup.space);
  }

  ControlVector g0{cfg.control_kind, Vec::Zero(problem.control_size())};
  AssimilationRun run;
  run.result = sqp_minimize(problem, g0, cfg.optimizer.kkt_tol,
                            cfg.optimizer.max_iterations,
                            cfg.optimizer.kkt_tol_rel);

  RunReportEntry& e = run.entry;
  e.label = label;
  e.control = cfg.control_kind == ControlKind::DirichletVelocity
                  ? "dirichlet_velocity"
                  : "neumann_pressure";
  e.family = to_string(cfg.family);
  e.h = setup.h;
  e.reynolds = (2.0 / 3.0) * cfg.inflow.peak * 2.0 * cfg.geometry.half_height /
               setup.nu;
  e.beta1 = weights.beta1;
  e.beta2 = weights.beta2;
  e.sections = join_sections(obs.section_ids);
  if (cfg.noise.enabled) e.noise_seed = cfg.noise.seed;
  e.re_omega = relative_error_region(setup.space, run.result.state.velocity,
                                     setup.truth_velocity, ErrorRegion::Omega);
  e.re_gamma_in =
      relative_error_region(setup.space, run.result.state.velocity,
                            setup.truth_velocity, ErrorRegion::GammaIn);
  e.re_omega_part = relative_error_region(
      setup.space, run.result.state.velocity, setup.truth_velocity,
      ErrorRegion::OmegaPart, obs.section_ids);
  e.cost = run.result.cost;
  e.iterations = run.result.trace.iterations;
  e.cost_evaluations = run.result.trace.cost_evaluations;
  e.status = to_string(run.result.trace.status);
  e.wall_clock_s = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return run;
}

double boundary_flux(const FeSpace& space, const Vec& U, BoundaryTag tag) {
  const Mesh& mesh = *space.mesh;
  const bool p2 = space.is_p2();
  double flux = 0.0;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != tag) continue;
    const auto& a = mesh.vertices[be.v0];
    const auto& b = mesh.vertices[be.v1];
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len = std::hypot(dx, dy);
    const std::array<double, 2> normal{dy / len, -dx / len};
    const int mid = p2 ? space.edge_node(be.v0, be.v1) : -1;
    for (int q = 0; q < EdgeQuadrature::n_points; ++q) {
      const double t = EdgeQuadrature::points[q];
      const double w = EdgeQuadrature::weights[q] * len;
      std::array<double, 3> shape{1.0 - t, t, 0.0};
      if (p2)
        shape = {(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0),
                 4.0 * t * (1.0 - t)};
      for (int c = 0; c < 2; ++c) {
        double u_c = shape[0] * U[space.velocity_dof(be.v0, c)] +
                     shape[1] * U[space.velocity_dof(be.v1, c)];
        if (p2) u_c += shape[2] * U[space.velocity_dof(mid, c)];
        flux += w * u_c * normal[c];
      }
    }
  }
  return flux;
}

ComparatorRun run_comparator_uq(const ScenarioConfig& cfg,
                                const WorkingSetup& setup,
                                const std::vector<int>& section_ids) {
  const auto t0 = std::chrono::steady_clock::now();
  const FeSpace& space = setup.space;

  const double rate =
      -boundary_flux(space, setup.truth_velocity, BoundaryTag::Inlet);
  const double peak = 3.0 * rate / (4.0 * cfg.geometry.half_height);

  const Vec control = parabolic_inlet_control(space, peak);
  const DirichletData bc = DirichletData::wall_and_inlet(space, control);
  const double reynolds = (2.0 / 3.0) * cfg.inflow.peak * 2.0 *
                          cfg.geometry.half_height / setup.nu;
  const NewtonResult solve = solve_with_continuation(
      space, setup.stab, setup.ops, setup.nu, bc, cfg.newton, reynolds);

  ComparatorRun out;
  out.state = solve.state;
  RunReportEntry& e = out.entry;
  e.label = "u_Q";
  e.control = "flow_rate_idealized";
  e.family = to_string(cfg.family);
  e.h = setup.h;
  e.reynolds = reynolds;
  e.beta1 = 0.0;
  e.beta2 = 0.0;
  e.sections = join_sections(section_ids);
  e.re_omega = relative_error_region(space, out.state.velocity,
                                     setup.truth_velocity, ErrorRegion::Omega);
  e.re_gamma_in =
      relative_error_region(space, out.state.velocity, setup.truth_velocity,
                            ErrorRegion::GammaIn);
  e.re_omega_part =
      relative_error_region(space, out.state.velocity, setup.truth_velocity,
                            ErrorRegion::OmegaPart, section_ids);
  e.cost = 0.0;
  e.iterations = solve.iterations;
  e.cost_evaluations = 1;
  e.status = "solved";
  e.wall_clock_s = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return out;
}

void export_fields(const FeSpace& space, const FlowState& state, double mu,
                   const std::string& path_prefix) {
  if (state.velocity.size() == 0 || state.pressure.size() == 0)
    throw NumericsError("export_fields: empty state");
  if (state.velocity.size() != space.n_velocity_dofs ||
      state.pressure.size() != space.n_pressure_dofs)
    throw NumericsError("export_fields: state does not match the space");
  const Mesh& mesh = *space.mesh;

  {
    auto out = open_out(path_prefix + ".vtk");
    out << "# vtk DataFile Version 3.0\n";
    out << "flowda fields\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.n_vertices() << " double\n";
    for (const auto& v : mesh.vertices)
      out << fmt(v[0]) << ' ' << fmt(v[1]) << " 0\n";
    out << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles()
        << '\n';
    for (const auto& t : mesh.triangles)
      out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << mesh.n_triangles() << '\n';
    for (int t = 0; t < mesh.n_triangles(); ++t) out << "5\n";
    out << "POINT_DATA " << mesh.n_vertices() << '\n';
    out << "VECTORS velocity double\n";
    for (int n = 0; n < mesh.n_vertices(); ++n)
      out << fmt(state.velocity[space.velocity_dof(n, 0)]) << ' '
          << fmt(state.velocity[space.velocity_dof(n, 1)]) << " 0\n";
    out << "SCALARS velocity_magnitude double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int n = 0; n < mesh.n_vertices(); ++n)
      out << fmt(std::hypot(state.velocity[space.velocity_dof(n, 0)],
                            state.velocity[space.velocity_dof(n, 1)]))
          << '\n';
    out << "SCALARS pressure double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int n = 0; n < mesh.n_vertices(); ++n)
      out << fmt(state.pressure[n]) << '\n';
  }

  {
    const WallShear wss = compute_wss(space, state.velocity, mu);
    auto out = open_out(path_prefix + "_wss.vtk");
    out << "# vtk DataFile Version 3.0\n";
    out << "flowda wall shear stress\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.n_vertices() << " double\n";
    for (const auto& v : mesh.vertices)
      out << fmt(v[0]) << ' ' << fmt(v[1]) << " 0\n";
    const int n_edges = static_cast<int>(wss.values.size());
    out << "CELLS " << n_edges << ' ' << 3 * n_edges << '\n';
    for (int k = 0; k < n_edges; ++k) {
      const auto& be = mesh.boundary_edges[wss.boundary_edge_index[k]];
      out << "2 " << be.v0 << ' ' << be.v1 << '\n';
    }
    out << "CELL_TYPES " << n_edges << '\n';
    for (int k = 0; k < n_edges; ++k) out << "3\n";
    out << "CELL_DATA " << n_edges << '\n';
    out << "SCALARS wss double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : wss.values) out << fmt(v) << '\n';
  }

  {
    auto out = open_out(path_prefix + "_velocity.csv");
    csv::write_row(out, {"node", "x", "y", "ux", "uy"});
    for (int n = 0; n < space.n_velocity_nodes; ++n)
      csv::write_row(out, {csv::format(n), fmt(space.node_coords[n][0]),
                           fmt(space.node_coords[n][1]),
                           fmt(state.velocity[space.velocity_dof(n, 0)]),
                           fmt(state.velocity[space.velocity_dof(n, 1)])});
  }
  {
    auto out = open_out(path_prefix + "_pressure.csv");
    csv::write_row(out, {"node", "x", "y", "p"});
    for (int n = 0; n < space.n_pressure_dofs; ++n)
      csv::write_row(out, {csv::format(n), fmt(mesh.vertices[n][0]),
                           fmt(mesh.vertices[n][1]), fmt(state.pressure[n])});
  }
}

namespace {

RunReportEntry error_entry(const std::string& label, const Error& err) {
  RunReportEntry e;
  e.label = label;
  e.status = "error:" + err.category();
  e.re_omega = e.re_gamma_in = e.re_omega_part =
      std::numeric_limits<double>::quiet_NaN();
  return e;
}

std::vector<int> all_section_ids(const WorkingSetup& setup) {
  std::vector<int> ids;
  for (const auto& [id, nodes] : setup.space.section_nodes) ids.push_back(id);
  return ids;
}

void write_traces(const std::vector<AssimilationRun>& runs,
                  const std::string& dir) {
  for (const auto& run : runs) {
    if (run.entry.status.rfind("error:", 0) == 0) continue;
    auto out = open_out(dir + "/" + sanitize_label(run.entry.label) +
                        "_trace.csv");
    write_trace_csv(run.result.trace, out);
  }
}

}  // namespace

ExperimentReport sweep(const ScenarioConfig& cfg) {
  ExperimentReport report;
  switch (cfg.sweep.axis) {
    case SweepSpec::Axis::Beta2: {
      const GroundTruth gt = run_ground_truth(cfg);
      const WorkingSetup setup = build_working(cfg, gt, cfg.h, cfg.nu);
      const ObservationSet obs =
          extract_observations(gt, setup, all_section_ids(setup), cfg.noise);
      const int n = static_cast<int>(cfg.sweep.beta2_ladder.size());
      std::vector<RunReportEntry> entries(n);
      std::vector<AssimilationRun> runs(n);
      run_pool(n, cfg.threads, [&](int i) {
        const double beta2 = cfg.sweep.beta2_ladder[i];
        const std::string label = "beta2=" + fmt(beta2);
        try {
          runs[i] = run_assimilation(cfg, setup, obs,
                                     {cfg.weights.beta1, beta2}, label);
          entries[i] = runs[i].entry;
        } catch (const Error& err) {
          entries[i] = error_entry(label, err);
        }
      });
      report.entries = entries;
      ensure_dir(cfg.output_dir);
      write_traces(runs, cfg.output_dir);
      break;
    }
    case SweepSpec::Axis::Reynolds: {
      const int n = static_cast<int>(cfg.sweep.reynolds.size());
      std::vector<RunReportEntry> entries(n);
      std::vector<AssimilationRun> runs(n);
      run_pool(n, cfg.threads, [&](int i) {
        const double re = cfg.sweep.reynolds[i];
        const std::string label = "re=" + fmt(re);
        try {
          const double nu = cfg.nu_for_reynolds(re);
          const GroundTruth gt = run_ground_truth(cfg, nu);
          const WorkingSetup setup = build_working(cfg, gt, cfg.h, nu);
          const ObservationSet obs = extract_observations(
              gt, setup, all_section_ids(setup), cfg.noise);
          runs[i] = run_assimilation(cfg, setup, obs, cfg.weights, label);
          entries[i] = runs[i].entry;
        } catch (const Error& err) {
          entries[i] = error_entry(label, err);
        }
      });
      report.entries = entries;
      ensure_dir(cfg.output_dir);
      write_traces(runs, cfg.output_dir);
      break;
    }
    case SweepSpec::Axis::MeshH: {
      const GroundTruth gt = run_ground_truth(cfg);
      // Reference optimum first; ladder errors are measured against it on
      // the reference mesh (coarse fields evaluated there exactly).
      const WorkingSetup ref_setup =
          build_working(cfg, gt, cfg.sweep.reference_h, cfg.nu);
      const ObservationSet ref_obs =
          extract_observations(gt, ref_setup, all_section_ids(ref_setup),
                               cfg.noise);
      AssimilationRun ref_run =
          run_assimilation(cfg, ref_setup, ref_obs, cfg.weights,
                           "h=" + fmt(cfg.sweep.reference_h) + "_reference");
      const CsrMatrix ref_mass = assemble_velocity_mass(ref_setup.space);
      const CsrMatrix ref_inlet_mass = assemble_inlet_mass(ref_setup.space);

      const int n = static_cast<int>(cfg.sweep.mesh_h.size());
      std::vector<RunReportEntry> entries(n);
      std::vector<AssimilationRun> runs(n);
      std::vector<std::shared_ptr<WorkingSetup>> setups(n);
      run_pool(n, cfg.threads, [&](int i) {
        const double h = cfg.sweep.mesh_h[i];
        const std::string label = "h=" + fmt(h);
        try {
          setups[i] = std::make_shared<WorkingSetup>(
              build_working(cfg, gt, h, cfg.nu));
          const ObservationSet obs = extract_observations(
              gt, *setups[i], all_section_ids(*setups[i]), cfg.noise);
          runs[i] = run_assimilation(cfg, *setups[i], obs, cfg.weights, label);
          entries[i] = runs[i].entry;
        } catch (const Error& err) {
          entries[i] = error_entry(label, err);
        }
      });
      for (int i = 0; i < n; ++i) {
        if (entries[i].status.rfind("error:", 0) == 0 || !setups[i]) continue;
        const FieldInterpolator coarse(setups[i]->space);
        const Vec on_ref = interpolate_velocity(
            coarse, runs[i].result.state.velocity, ref_setup.space);
        entries[i].re_state_vs_ref =
            relative_error(on_ref, ref_run.result.state.velocity, ref_mass);
        entries[i].re_control_vs_ref = relative_error(
            on_ref, ref_run.result.state.velocity, ref_inlet_mass);
      }
      report.entries.push_back(ref_run.entry);
      report.entries.insert(report.entries.end(), entries.begin(),
                            entries.end());
      ensure_dir(cfg.output_dir);
      write_traces(runs, cfg.output_dir);
      {
        std::vector<AssimilationRun> ref_only;
        ref_only.push_back(std::move(ref_run));
        write_traces(ref_only, cfg.output_dir);
      }
      break;
    }
    case SweepSpec::Axis::ObservationSubsets: {
      const GroundTruth gt = run_ground_truth(cfg);
      const WorkingSetup setup = build_working(cfg, gt, cfg.h, cfg.nu);
      const int n = static_cast<int>(cfg.sweep.observation_subsets.size());
      std::vector<RunReportEntry> entries(n);
      std::vector<AssimilationRun> runs(n);
      run_pool(n, cfg.threads, [&](int i) {
        const auto& subset = cfg.sweep.observation_subsets[i];
        const std::string label = "sections=" + join_sections(subset);
        try {
          const ObservationSet obs =
              extract_observations(gt, setup, subset, cfg.noise);
          runs[i] = run_assimilation(cfg, setup, obs, cfg.weights, label);
          entries[i] = runs[i].entry;
        } catch (const Error& err) {
          entries[i] = error_entry(label, err);
        }
      });
      report.entries = entries;
      ensure_dir(cfg.output_dir);
      write_traces(runs, cfg.output_dir);
      break;
    }
    case SweepSpec::Axis::None:
      throw ConfigError("sweep: no axis configured");
  }
  return report;
}

void command_mesh(const ScenarioConfig& cfg) {
  ensure_dir(cfg.output_dir);
  Mesh full = build_full_channel(cfg, cfg.h, cfg.resolved_sections());
  const Mesh mesh = cfg.geometry.truncation_x ? truncate(full, cfg.geometry)
                                              : std::move(full);
  mesh.validate();
  {
    auto out = open_out(cfg.output_dir + "/mesh.vtk");
    write_vtk(mesh, out);
  }
  {
    auto out = open_out(cfg.output_dir + "/mesh.dump");
    write_mesh_dump(mesh, out);
  }
}

RunReportEntry command_solve(const ScenarioConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const GroundTruth gt = run_ground_truth(cfg);
  export_fields(*gt.space, gt.state, cfg.mu,
                cfg.output_dir + "/ground_truth");
  RunReportEntry e;
  e.label = "ground_truth";
  e.control = "prescribed_inflow";
  e.family = to_string(cfg.family);
  e.h = cfg.working_ground_truth_h();
  e.reynolds = cfg.reynolds_number();
  e.status = "solved";
  e.wall_clock_s = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return e;
}

namespace {

void write_report_files(const ExperimentReport& report,
                        const std::string& dir) {
  ensure_dir(dir);
  {
    auto out = open_out(dir + "/report.csv");
    write_report_csv(report, out);
  }
  {
    auto out = open_out(dir + "/timing.csv");
    write_timing_csv(report, out);
  }
}

}  // namespace

ExperimentReport command_assimilate(const ScenarioConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const GroundTruth gt = run_ground_truth(cfg);
  const WorkingSetup setup = build_working(cfg, gt, cfg.h, cfg.nu);
  const auto ids = all_section_ids(setup);
  if (ids.empty())
    throw ConfigError("assimilate: no observation sections in the config");
  const ObservationSet obs = extract_observations(gt, setup, ids, cfg.noise);
  const AssimilationRun run =
      run_assimilation(cfg, setup, obs, cfg.weights, "assimilate");

  export_fields(setup.space, run.result.state, cfg.mu,
                cfg.output_dir + "/controlled");
  {
    auto out = open_out(cfg.output_dir + "/assimilate_trace.csv");
    write_trace_csv(run.result.trace, out);
  }
  {
    auto out = open_out(cfg.output_dir + "/observations.csv");
    csv::write_row(out, {"section", "node", "x", "y", "ux", "uy"});
    for (int id : obs.section_ids)
      for (int node : setup.space.section_nodes.at(id))
        csv::write_row(
            out,
            {csv::format(id), csv::format(node),
             fmt(setup.space.node_coords[node][0]),
             fmt(setup.space.node_coords[node][1]),
             fmt(obs.target[setup.space.velocity_dof(node, 0)]),
             fmt(obs.target[setup.space.velocity_dof(node, 1)])});
  }
  ExperimentReport report;
  report.entries.push_back(run.entry);
  write_report_files(report, cfg.output_dir);
  return report;
}

ExperimentReport command_sweep(const ScenarioConfig& cfg) {
  const ExperimentReport report = sweep(cfg);
  write_report_files(report, cfg.output_dir);
  return report;
}

ExperimentReport command_compare_uq(const ScenarioConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const GroundTruth gt = run_ground_truth(cfg);
  const WorkingSetup setup = build_working(cfg, gt, cfg.h, cfg.nu);
  const auto ids = all_section_ids(setup);
  if (ids.empty())
    throw ConfigError("compare-uq: no observation sections in the config");
  const ObservationSet obs = extract_observations(gt, setup, ids, cfg.noise);

  const AssimilationRun controlled =
      run_assimilation(cfg, setup, obs, cfg.weights, "controlled");
  const ComparatorRun comparator = run_comparator_uq(cfg, setup, ids);

  export_fields(setup.space, controlled.result.state, cfg.mu,
                cfg.output_dir + "/controlled");
  export_fields(setup.space, comparator.state, cfg.mu,
                cfg.output_dir + "/u_q");
  {
    auto out = open_out(cfg.output_dir + "/controlled_trace.csv");
    write_trace_csv(controlled.result.trace, out);
  }

  // Per-wall-edge WSS comparison against the ground truth (nearest ground
  // truth wall edge by midpoint).
  const WallShear wss_truth =
      compute_wss(*gt.space, gt.state.velocity, cfg.mu);
  const WallShear wss_ctrl =
      compute_wss(setup.space, controlled.result.state.velocity, cfg.mu);
  const WallShear wss_uq =
      compute_wss(setup.space, comparator.state.velocity, cfg.mu);

  double truth_max = 0.0;
  for (double v : wss_truth.values) truth_max = std::max(truth_max, v);
  const double floor = std::max(1e-3 * truth_max, 1e-300);

  auto nearest_truth = [&](const std::array<double, 2>& p) {
    double best = std::numeric_limits<double>::max();
    double value = 0.0;
    for (std::size_t k = 0; k < wss_truth.values.size(); ++k) {
      const auto& q = wss_truth.midpoints[k];
      const double d = std::hypot(p[0] - q[0], p[1] - q[1]);
      if (d < best) {
        best = d;
        value = wss_truth.values[k];
      }
    }
    return value;
  };

  {
    auto out = open_out(cfg.output_dir + "/wss_compare.csv");
    csv::write_row(out, {"x", "y", "distance_from_inlet", "wss_truth",
                         "wss_controlled", "wss_uq", "relerr_controlled",
                         "relerr_uq"});
    const Mesh& mesh = setup.mesh;
    for (std::size_t k = 0; k < wss_ctrl.values.size(); ++k) {
      const auto& p = wss_ctrl.midpoints[k];
      const auto& be = mesh.boundary_edges[wss_ctrl.boundary_edge_index[k]];
      const int col = std::min(be.v0, be.v1) / (mesh.n_rows + 1);
      const double station =
          0.5 * (mesh.col_stations[col] + mesh.col_stations[col + 1]);
      const double dist = station - mesh.col_stations.front();
      const double truth = nearest_truth(p);
      const double denom = std::max(std::abs(truth), floor);
      const double rel_ctrl = std::abs(wss_ctrl.values[k] - truth) / denom;
      const double rel_uq = std::abs(wss_uq.values[k] - truth) / denom;
      csv::write_row(out, {fmt(p[0]), fmt(p[1]), fmt(dist), fmt(truth),
                           fmt(wss_ctrl.values[k]), fmt(wss_uq.values[k]),
                           fmt(rel_ctrl), fmt(rel_uq)});
    }
  }

  ExperimentReport report;
  report.entries.push_back(controlled.entry);
  report.entries.push_back(comparator.entry);
  write_report_files(report, cfg.output_dir);
  return report;
}

std::string render_report_table(const std::string& report_csv_path) {
  std::ifstream in(report_csv_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + report_csv_path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(field);
        field.clear();
      } else {
        field += c;
      }
    }
    fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) return "(empty report)\n";

  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size())
        out << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace flowda
