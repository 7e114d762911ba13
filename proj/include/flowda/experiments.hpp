#pragma once

#include <memory>
#include <optional>
#include <string>

#include "flowda/assimilation.hpp"
#include "flowda/interpolate.hpp"
#include "flowda/scenario.hpp"

namespace flowda {

// Ground-truth solve on the extended (untruncated) domain.
struct GroundTruth {
  std::shared_ptr<Mesh> mesh;
  std::shared_ptr<FeSpace> space;
  std::shared_ptr<FieldInterpolator> interpolator;
  FlowState state;
  double nu = 1.0;
};

GroundTruth run_ground_truth(const ScenarioConfig& cfg, double nu_override = 0);

// Working-domain discretization with the ground truth interpolated onto it.
struct WorkingSetup {
  Mesh mesh;
  FeSpace space;
  StabilizationParams stab;
  AssembledOperators ops;
  Vec truth_velocity;  // u_d on working velocity nodes
  Vec truth_pressure;
  double nu = 1.0;
  double h = 0.0;
};

WorkingSetup build_working(const ScenarioConfig& cfg, const GroundTruth& gt,
                           double h, double nu);

// Observation extraction: nodal interpolation from the ground-truth mesh; if
// noise is enabled, i.i.d. Gaussian with sigma = level * U0 / 3 (U0 = max
// ground-truth speed on the working inlet) from the counter-based generator.
ObservationSet extract_observations(const GroundTruth& gt,
                                    const WorkingSetup& setup,
                                    const std::vector<int>& section_ids,
                                    const NoiseSpec& noise);

struct RunReportEntry {
  std::string label;
  std::string control = "dirichlet_velocity";
  std::string family = "p1p1";
  double h = 0.0;
  double reynolds = 0.0;
  double beta1 = 0.0, beta2 = 0.0;
  std::string sections;  // e.g. "0+1+2"
  std::optional<std::uint64_t> noise_seed;
  double re_omega = 0.0, re_gamma_in = 0.0, re_omega_part = 0.0;
  std::optional<double> re_state_vs_ref, re_control_vs_ref;
  double cost = 0.0;
  int iterations = 0, cost_evaluations = 0;
  std::string status = "converged";
  double wall_clock_s = 0.0;  // written to timing.csv only
};

struct ExperimentReport {
  std::vector<RunReportEntry> entries;
};

// report.csv carries only deterministic columns; wall-clock goes to
// timing.csv so identical config + seed reproduce report bytes exactly.
void write_report_csv(const ExperimentReport& report, std::ostream& out);
void write_timing_csv(const ExperimentReport& report, std::ostream& out);

struct AssimilationRun {
  OptimizeResult result;
  RunReportEntry entry;
};

AssimilationRun run_assimilation(const ScenarioConfig& cfg,
                                 const WorkingSetup& setup,
                                 const ObservationSet& obs,
                                 const CostWeights& weights,
                                 const std::string& label);

// Flow-rate-idealized comparator: parabolic inflow matching the exact
// ground-truth flow rate through the working inlet.
struct ComparatorRun {
  FlowState state;
  RunReportEntry entry;
};

ComparatorRun run_comparator_uq(const ScenarioConfig& cfg,
                                const WorkingSetup& setup,
                                const std::vector<int>& section_ids);

// Field export: legacy-VTK (velocity, magnitude, pressure; WSS on wall edges
// as a companion line-cell file) plus CSV tables. Deterministic output.
void export_fields(const FeSpace& space, const FlowState& state, double mu,
                   const std::string& path_prefix);

// Boundary flux of a velocity field through all edges with the given tag
// (outward-normal convention).
double boundary_flux(const FeSpace& space, const Vec& U, BoundaryTag tag);

// Sweep driver per cfg.sweep.axis; points run in a bounded worker pool and
// failures are recorded per point without aborting the sweep.
ExperimentReport sweep(const ScenarioConfig& cfg);

// CLI verb entry points; each writes into cfg.output_dir.
void command_mesh(const ScenarioConfig& cfg);
RunReportEntry command_solve(const ScenarioConfig& cfg);
ExperimentReport command_assimilate(const ScenarioConfig& cfg);
ExperimentReport command_sweep(const ScenarioConfig& cfg);
ExperimentReport command_compare_uq(const ScenarioConfig& cfg);
std::string render_report_table(const std::string& report_csv_path);

}  // namespace flowda
