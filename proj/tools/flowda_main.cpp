#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

#include "flowda/experiments.hpp"
#include "flowda/log.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<double> h, nu, beta1, beta2, noise_level, inflow_peak;
  std::optional<std::string> output_dir, family, control;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, max_iterations;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Overrides& opt) {
  cmd->add_option("--config", opt.config_path, "scenario config file (JSON)")
      ->required();
  cmd->add_option("--h", opt.h, "working mesh size override");
  cmd->add_option("--nu", opt.nu, "kinematic viscosity override");
  cmd->add_option("--beta1", opt.beta1, "tracking weight override");
  cmd->add_option("--beta2", opt.beta2, "regularization weight override");
  cmd->add_option("--inflow-peak", opt.inflow_peak,
                  "ground-truth inflow peak override");
  cmd->add_option("--noise-level", opt.noise_level, "noise level override");
  cmd->add_option("--seed", opt.seed, "noise seed override");
  cmd->add_option("--output-dir", opt.output_dir, "output directory override");
  cmd->add_option("--family", opt.family, "element family: p1p1|p2p1");
  cmd->add_option("--control", opt.control,
                  "control kind: dirichlet_velocity|neumann_pressure");
  cmd->add_option("--threads", opt.threads, "worker pool size");
  cmd->add_option("--max-iterations", opt.max_iterations,
                  "optimizer iteration cap override");
  cmd->add_flag("-v,--verbose", opt.verbose, "structured log to stderr");
}

flowda::ScenarioConfig load_with_overrides(const Overrides& opt) {
  flowda::ScenarioConfig cfg = flowda::load_config(opt.config_path);
  if (opt.h) cfg.h = *opt.h;
  if (opt.nu) cfg.nu = *opt.nu;
  if (opt.beta1) cfg.weights.beta1 = *opt.beta1;
  if (opt.beta2) cfg.weights.beta2 = *opt.beta2;
  if (opt.inflow_peak) cfg.inflow.peak = *opt.inflow_peak;
  if (opt.noise_level) cfg.noise.level = *opt.noise_level;
  if (opt.seed) {
    cfg.noise.seed = *opt.seed;
    cfg.noise.seed_set = true;
  }
  if (opt.output_dir) cfg.output_dir = *opt.output_dir;
  if (opt.family) {
    if (*opt.family == "p1p1")
      cfg.family = flowda::ElementFamily::StabilizedP1P1;
    else if (*opt.family == "p2p1")
      cfg.family = flowda::ElementFamily::TaylorHoodP2P1;
    else
      throw flowda::ConfigError("--family must be p1p1 or p2p1");
  }
  if (opt.control) {
    if (*opt.control == "dirichlet_velocity")
      cfg.control_kind = flowda::ControlKind::DirichletVelocity;
    else if (*opt.control == "neumann_pressure")
      cfg.control_kind = flowda::ControlKind::NeumannPressure;
    else
      throw flowda::ConfigError(
          "--control must be dirichlet_velocity or neumann_pressure");
  }
  if (opt.threads) cfg.threads = *opt.threads;
  if (opt.max_iterations) cfg.optimizer.max_iterations = *opt.max_iterations;
  if (opt.verbose)
    flowda::log::set_sink(
        [](const std::string& line) { std::cerr << line << '\n'; });
  cfg.validate();
  return cfg;
}

int exit_code_for(const flowda::Error& err) {
  if (err.category() == "config") return 2;
  if (err.category() == "mesh") return 3;
  if (err.category() == "numerics") return 4;
  if (err.category() == "solver") return 5;
  if (err.category() == "io") return 6;
  return 1;
}

void print_entries(const flowda::ExperimentReport& report) {
  for (const auto& e : report.entries)
    std::cout << e.label << ": re_omega=" << e.re_omega
              << " re_gamma_in=" << e.re_gamma_in
              << " re_omega_part=" << e.re_omega_part << " cost=" << e.cost
              << " iterations=" << e.iterations
              << " cost_evals=" << e.cost_evaluations
              << " status=" << e.status << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowda: channel-flow boundary-data assimilation"};
  app.require_subcommand(1);

  Overrides opt;
  std::string report_path;

  CLI::App* mesh = app.add_subcommand("mesh", "build and export the working mesh");
  add_common(mesh, opt);
  CLI::App* solve =
      app.add_subcommand("solve", "solve and export the ground truth flow");
  add_common(solve, opt);
  CLI::App* assim = app.add_subcommand(
      "assimilate", "run one boundary-data assimilation experiment");
  add_common(assim, opt);
  CLI::App* sw = app.add_subcommand("sweep", "run the configured sweep axis");
  add_common(sw, opt);
  CLI::App* uq = app.add_subcommand(
      "compare-uq", "assimilation versus the flow-rate-idealized inflow");
  add_common(uq, opt);
  CLI::App* rep =
      app.add_subcommand("report", "pretty-print a run's report.csv");
  rep->add_option("report_csv", report_path, "path to report.csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (rep->parsed()) {
      std::cout << flowda::render_report_table(report_path);
      return 0;
    }
    const flowda::ScenarioConfig cfg = load_with_overrides(opt);
    if (mesh->parsed()) {
      flowda::command_mesh(cfg);
      std::cout << "mesh written to " << cfg.output_dir << "\n";
    } else if (solve->parsed()) {
      const auto entry = flowda::command_solve(cfg);
      std::cout << "ground truth solved (Re=" << entry.reynolds
                << "), fields in " << cfg.output_dir << "\n";
    } else if (assim->parsed()) {
      print_entries(flowda::command_assimilate(cfg));
    } else if (sw->parsed()) {
      print_entries(flowda::command_sweep(cfg));
    } else if (uq->parsed()) {
      print_entries(flowda::command_compare_uq(cfg));
    }
    return 0;
  } catch (const flowda::Error& err) {
    std::cerr << "error category=" << err.category()
              << " message=" << err.what() << '\n';
    return exit_code_for(err);
  } catch (const std::exception& err) {
    std::cerr << "error category=internal message=" << err.what() << '\n';
    return 1;
  }
}
