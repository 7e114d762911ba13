#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowda/assimilation.hpp"
#include "flowda/mesh.hpp"

namespace flowda {

// Station along the channel centerline, either absolute or relative to a
// named geometric anchor. The curved channel's bend arc is generally not a
// multiple of h, so junction-relative stations are the reliable way to name
// aligned columns there.
struct StationRef {
  enum class From { Origin, BendStart, BendEnd, Outlet };
  From from = From::Origin;
  double offset = 0.0;

  double resolve(const ChannelSpec& spec) const;
};

struct NoiseSpec {
  bool enabled = false;
  double level = 0.2;  // sigma = level * U0 / 3
  std::uint64_t seed = 0;
  bool seed_set = false;
};

struct InflowSpec {
  double peak = 1.0;  // parabolic profile peak speed (m/s)
};

struct OptimizerSettings {
  double kkt_tol = 1e-6;
  double kkt_tol_rel = 0.0;
  int max_iterations = 500;
};

struct SweepSpec {
  enum class Axis { None, Beta2, Reynolds, MeshH, ObservationSubsets };
  Axis axis = Axis::None;
  std::vector<double> beta2_ladder;
  std::vector<double> reynolds;
  std::vector<double> mesh_h;
  double reference_h = 0.0;  // mesh ladder reference
  std::vector<std::vector<int>> observation_subsets;
};

// Complete declarative description of one assimilation experiment.
struct ScenarioConfig {
  ChannelSpec geometry;
  ElementFamily family = ElementFamily::StabilizedP1P1;
  double h = 0.05;
  double ground_truth_h = 0.0;  // 0 -> same as h
  double nu = 1.0;              // m^2/s
  double mu = 1.0;              // Pa s, for WSS only
  InflowSpec inflow;
  std::vector<StationRef> sections;
  NoiseSpec noise;
  CostWeights weights;
  ControlKind control_kind = ControlKind::DirichletVelocity;
  OptimizerSettings optimizer;
  NewtonSettings newton;
  SweepSpec sweep;
  std::string output_dir = "out";
  int threads = 0;  // 0 -> hardware concurrency

  double working_ground_truth_h() const {
    return ground_truth_h > 0 ? ground_truth_h : h;
  }
  // Mean-velocity Reynolds number: (2/3 peak) * (2 half_height) / nu.
  double reynolds_number() const;
  double nu_for_reynolds(double reynolds) const;

  std::vector<double> resolved_sections() const;
  void validate() const;
};

ScenarioConfig parse_config_json(const std::string& text);
ScenarioConfig load_config(const std::string& path);

}  // namespace flowda
