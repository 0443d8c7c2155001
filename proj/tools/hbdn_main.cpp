// hbdn: run, certify, rate and sweep distributed heavy-ball Newton experiments.
//
// Exit codes: 0 success, 1 usage or input error, 2 at least one run diverged.

#include "hbdn/csv.hpp"
#include "hbdn/error.hpp"
#include "hbdn/experiment.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

namespace {

constexpr int kExitDiverged = 2;

int cmd_run(const std::string& config_path) {
  const auto cfg = hbdn::load_config(config_path);
  const auto summary = hbdn::run_experiment(cfg);
  std::cout << std::setprecision(6);
  std::cout << "f* = " << std::setprecision(15) << summary.f_star << std::setprecision(6) << '\n';
  for (const auto& o : summary.outcomes) {
    std::cout << o.spec.name << " (" << hbdn::to_string(o.spec.variant) << ", alpha=" << o.spec.alpha
              << ", beta=" << o.spec.beta << "): " << hbdn::to_string(o.status)
              << ", rounds=" << o.rounds << ", f-f*=" << o.final_gap;
    if (o.rate) std::cout << ", rho_hat=" << o.rate->rho_hat;
    if (o.rho_m) std::cout << ", rho(M)=" << *o.rho_m << (o.certified ? " certified" : " uncertified");
    std::cout << ", " << o.wall_time << " s";
    if (!o.error.empty()) std::cout << " [" << o.error << ']';
    std::cout << '\n';
  }
  std::cout << "outputs in " << hbdn::resolve_output_dir(cfg).string() << '\n';
  return summary.any_diverged() ? kExitDiverged : 0;
}

int cmd_certify(const std::string& config_path, double alpha, double beta) {
  const auto cfg = hbdn::load_config(config_path);
  const auto problem = hbdn::build_problem(cfg);
  hbdn::print_certificate(std::cout, problem.constants(), alpha, beta);
  return 0;
}

int cmd_rate(const std::string& trace_path) {
  hbdn::rate_report(std::cout, trace_path);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path) {
  const auto cfg = hbdn::load_config(config_path);
  const auto grid = hbdn::load_grid(grid_path);
  hbdn::run_sweep(std::cout, cfg, grid);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed heavy-ball Newton experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every configured algorithm and write CSV artifacts");
  run->add_option("config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);

  double alpha = 0.0;
  double beta = 0.0;
  auto* certify = app.add_subcommand("certify", "Print the convergence certificate for (alpha, beta)");
  certify->add_option("config", config_path, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  certify->add_option("--alpha", alpha, "Step size")->required();
  certify->add_option("--beta", beta, "Momentum")->default_val(0.0);

  std::string trace_path;
  auto* rate = app.add_subcommand("rate", "Fit a linear rate to a trace CSV");
  rate->add_option("trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);

  std::string grid_path;
  auto* sweep = app.add_subcommand("sweep", "Run a hyperparameter grid on the config's problem");
  sweep->add_option("config", config_path, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid_path, "Grid file: variant alpha [beta] per line")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path);
    if (*certify) return cmd_certify(config_path, alpha, beta);
    if (*rate) return cmd_rate(trace_path);
    if (*sweep) return cmd_sweep(config_path, grid_path);
  } catch (const hbdn::Error& e) {
    std::cerr << "error (" << hbdn::to_string(e.kind()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
