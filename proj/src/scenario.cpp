#include "flowda/scenario.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace flowda {

using nlohmann::json;

double StationRef::resolve(const ChannelSpec& spec) const {
  switch (from) {
    case From::Origin: return offset;
    case From::BendStart: return spec.bend_start() + offset;
    case From::BendEnd: return spec.bend_end() + offset;
    case From::Outlet: return spec.total_centerline_length() + offset;
  }
  return offset;
}

double ScenarioConfig::reynolds_number() const {
  return (2.0 / 3.0) * inflow.peak * (2.0 * geometry.half_height) / nu;
}

double ScenarioConfig::nu_for_reynolds(double reynolds) const {
  if (reynolds <= 0) throw ConfigError("reynolds must be positive");
  return (2.0 / 3.0) * inflow.peak * (2.0 * geometry.half_height) / reynolds;
}

std::vector<double> ScenarioConfig::resolved_sections() const {
  std::vector<double> out;
  out.reserve(sections.size());
  for (const auto& s : sections) out.push_back(s.resolve(geometry));
  return out;
}

void ScenarioConfig::validate() const {
  geometry.validate();
  if (h <= 0) throw ConfigError("h must be positive");
  if (ground_truth_h > h + 1e-15)
    throw ConfigError(
        "ground_truth_h must be at least as fine as the working h");
  if (nu <= 0) throw ConfigError("nu must be positive");
  if (mu <= 0) throw ConfigError("mu must be positive");
  if (noise.enabled && !noise.seed_set)
    throw ConfigError("noise requires an explicit seed");
  if (weights.beta1 < 0 || weights.beta2 < 0 ||
      (weights.beta1 == 0 && weights.beta2 == 0))
    throw ConfigError("weights: need beta1 > 0 or beta2 > 0");
  if (sweep.axis == SweepSpec::Axis::MeshH) {
    if (sweep.mesh_h.empty() || sweep.reference_h <= 0)
      throw ConfigError("mesh sweep needs mesh_h values and reference_h");
    for (double hh : sweep.mesh_h)
      if (ground_truth_h > 0 && ground_truth_h > hh + 1e-15)
        throw ConfigError(
            "ground_truth_h must be at least as fine as every ladder h");
  }
  if (sweep.axis == SweepSpec::Axis::ObservationSubsets) {
    if (sweep.observation_subsets.empty())
      throw ConfigError("observation sweep needs subsets");
    for (const auto& subset : sweep.observation_subsets)
      for (int id : subset)
        if (id < 0 || id >= static_cast<int>(sections.size()))
          throw ConfigError("observation subset references unknown section " +
                            std::to_string(id));
  }
}

namespace {

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!obj.is_object())
    throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + key + "' in " + where);
}

double require_number(const json& obj, const std::string& key,
                      const std::string& where) {
  if (!obj.contains(key))
    throw ConfigError("config: missing '" + key + "' in " + where);
  if (!obj[key].is_number())
    throw ConfigError("config: '" + key + "' in " + where +
                      " must be a number");
  return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return obj[key].get<double>();
}

StationRef parse_station(const json& j, const std::string& where) {
  StationRef ref;
  if (j.is_number()) {
    ref.offset = j.get<double>();
    return ref;
  }
  check_keys(j, where, {"from", "offset"});
  const std::string from = j.value("from", "origin");
  if (from == "origin") ref.from = StationRef::From::Origin;
  else if (from == "bend_start") ref.from = StationRef::From::BendStart;
  else if (from == "bend_end") ref.from = StationRef::From::BendEnd;
  else if (from == "outlet") ref.from = StationRef::From::Outlet;
  else
    throw ConfigError("config: unknown station anchor '" + from + "' in " +
                      where);
  ref.offset = number_or(j, "offset", 0.0);
  return ref;
}

}  // namespace

ScenarioConfig parse_config_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  check_keys(root, "config",
             {"version", "geometry", "element_family", "h", "ground_truth_h",
              "physics", "observations", "weights", "control", "optimizer",
              "newton", "sweep", "output_dir", "threads"});
  if (root.value("version", 1) != 1)
    throw ConfigError("config: unsupported version");

  ScenarioConfig cfg;

  if (root.contains("geometry")) {
    const json& g = root["geometry"];
    check_keys(g, "geometry",
               {"kind", "length", "half_height", "upstream_length",
                "bend_angle_deg", "bend_radius", "downstream_length",
                "truncate_at"});
    const std::string kind = g.value("kind", "straight");
    if (kind == "straight") cfg.geometry.kind = ChannelSpec::Kind::Straight;
    else if (kind == "curved") cfg.geometry.kind = ChannelSpec::Kind::Curved;
    else throw ConfigError("config: geometry.kind must be straight|curved");
    cfg.geometry.length = number_or(g, "length", cfg.geometry.length);
    cfg.geometry.half_height =
        number_or(g, "half_height", cfg.geometry.half_height);
    cfg.geometry.upstream_length =
        number_or(g, "upstream_length", cfg.geometry.upstream_length);
    cfg.geometry.bend_angle_deg =
        number_or(g, "bend_angle_deg", cfg.geometry.bend_angle_deg);
    cfg.geometry.bend_radius =
        number_or(g, "bend_radius", cfg.geometry.bend_radius);
    cfg.geometry.downstream_length =
        number_or(g, "downstream_length", cfg.geometry.downstream_length);
    if (g.contains("truncate_at"))
      cfg.geometry.truncation_x =
          parse_station(g["truncate_at"], "geometry.truncate_at")
              .resolve(cfg.geometry);
  }

  if (root.contains("element_family")) {
    const std::string fam = root["element_family"].get<std::string>();
    if (fam == "p2p1") cfg.family = ElementFamily::TaylorHoodP2P1;
    else if (fam == "p1p1") cfg.family = ElementFamily::StabilizedP1P1;
    else throw ConfigError("config: element_family must be p2p1|p1p1");
  }

  cfg.h = number_or(root, "h", cfg.h);
  cfg.ground_truth_h = number_or(root, "ground_truth_h", 0.0);

  if (root.contains("physics")) {
    const json& p = root["physics"];
    check_keys(p, "physics", {"nu", "mu", "inflow_peak"});
    cfg.nu = number_or(p, "nu", cfg.nu);
    cfg.mu = number_or(p, "mu", cfg.mu);
    cfg.inflow.peak = number_or(p, "inflow_peak", cfg.inflow.peak);
  }

  if (root.contains("observations")) {
    const json& o = root["observations"];
    check_keys(o, "observations", {"sections", "noise"});
    if (o.contains("sections")) {
      if (!o["sections"].is_array())
        throw ConfigError("config: observations.sections must be an array");
      int idx = 0;
      for (const auto& s : o["sections"])
        cfg.sections.push_back(
            parse_station(s, "observations.sections[" + std::to_string(idx++) +
                                 "]"));
    }
    if (o.contains("noise")) {
      const json& n = o["noise"];
      check_keys(n, "observations.noise", {"enabled", "level", "seed"});
      cfg.noise.enabled = n.value("enabled", false);
      cfg.noise.level = number_or(n, "level", cfg.noise.level);
      if (n.contains("seed")) {
        cfg.noise.seed = n["seed"].get<std::uint64_t>();
        cfg.noise.seed_set = true;
      }
    }
  }

  if (root.contains("weights")) {
    const json& w = root["weights"];
    check_keys(w, "weights", {"beta1", "beta2"});
    cfg.weights.beta1 = require_number(w, "beta1", "weights");
    cfg.weights.beta2 = require_number(w, "beta2", "weights");
  }

  if (root.contains("control")) {
    const json& c = root["control"];
    check_keys(c, "control", {"kind"});
    const std::string kind = c.value("kind", "dirichlet_velocity");
    if (kind == "dirichlet_velocity")
      cfg.control_kind = ControlKind::DirichletVelocity;
    else if (kind == "neumann_pressure")
      cfg.control_kind = ControlKind::NeumannPressure;
    else
      throw ConfigError(
          "config: control.kind must be dirichlet_velocity|neumann_pressure");
  }

  if (root.contains("optimizer")) {
    const json& o = root["optimizer"];
    check_keys(o, "optimizer", {"kkt_tol", "kkt_tol_rel", "max_iterations"});
    cfg.optimizer.kkt_tol = number_or(o, "kkt_tol", cfg.optimizer.kkt_tol);
    cfg.optimizer.kkt_tol_rel =
        number_or(o, "kkt_tol_rel", cfg.optimizer.kkt_tol_rel);
    cfg.optimizer.max_iterations = static_cast<int>(
        number_or(o, "max_iterations", cfg.optimizer.max_iterations));
  }

  if (root.contains("newton")) {
    const json& n = root["newton"];
    check_keys(n, "newton", {"tolerance", "max_iterations"});
    cfg.newton.tolerance = number_or(n, "tolerance", cfg.newton.tolerance);
    cfg.newton.max_iterations = static_cast<int>(
        number_or(n, "max_iterations", cfg.newton.max_iterations));
  }

  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    check_keys(s, "sweep",
               {"axis", "beta2_ladder", "reynolds", "mesh_h", "reference_h",
                "observation_subsets"});
    const std::string axis = s.value("axis", "none");
    if (axis == "none") cfg.sweep.axis = SweepSpec::Axis::None;
    else if (axis == "beta2") cfg.sweep.axis = SweepSpec::Axis::Beta2;
    else if (axis == "reynolds") cfg.sweep.axis = SweepSpec::Axis::Reynolds;
    else if (axis == "mesh") cfg.sweep.axis = SweepSpec::Axis::MeshH;
    else if (axis == "observation_subsets")
      cfg.sweep.axis = SweepSpec::Axis::ObservationSubsets;
    else throw ConfigError("config: unknown sweep axis '" + axis + "'");
    if (s.contains("beta2_ladder"))
      cfg.sweep.beta2_ladder = s["beta2_ladder"].get<std::vector<double>>();
    if (s.contains("reynolds"))
      cfg.sweep.reynolds = s["reynolds"].get<std::vector<double>>();
    if (s.contains("mesh_h"))
      cfg.sweep.mesh_h = s["mesh_h"].get<std::vector<double>>();
    cfg.sweep.reference_h = number_or(s, "reference_h", 0.0);
    if (s.contains("observation_subsets"))
      cfg.sweep.observation_subsets =
          s["observation_subsets"].get<std::vector<std::vector<int>>>();
  }

  cfg.output_dir = root.value("output_dir", cfg.output_dir);
  cfg.threads = static_cast<int>(number_or(root, "threads", 0));

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_json(text);
}

}  // namespace flowda
