#pragma once

// Experiment harness: configuration, problem assembly, algorithm suites and
// the CSV artifacts they produce.
//
// Config files are plain key = value lines with dotted section paths:
//
//   graph.kind = regular            # or erdos_renyi
//   graph.n = 20
//   graph.degree = 14               # regular only
//   graph.p = 0.3                   # erdos_renyi only
//   data.source = synthetic         # or file (data.path, data.label_column,
//   data.m = 4000                   #          data.positive_label)
//   objective.lambda = 0.05
//   algorithm.hb.variant = newton_hb
//   algorithm.hb.alpha = 0.15
//   algorithm.hb.beta = 0.5
//   stopping.grad_tol = 1e-8
//   output_dir = out
//
// Algorithms keep the order in which their names first appear.

#include "hbdn/algorithm.hpp"
#include "hbdn/data.hpp"
#include "hbdn/graph.hpp"
#include "hbdn/objective.hpp"
#include "hbdn/theory.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hbdn {

struct GraphSpec {
  std::string kind = "regular";
  int n = 20;
  int degree = 14;
  double p = 0.3;
  std::uint64_t seed = 1;
};

struct DataSpec {
  std::string source = "synthetic";
  int m = 4000;
  int p = 10;
  double separation = 2.0;
  std::string path;
  int label_column = -1;
  std::string positive_label = "2";  // "class 2 vs rest" for multi-class files
  int k_pca = 0;                     // 0 keeps the raw features
  bool standardize = false;
  std::uint64_t seed = 42;
};

struct AlgorithmSpec {
  std::string name;
  Variant variant = Variant::NewtonHeavyBall;
  double alpha = 0.0;
  double beta = 0.0;

  [[nodiscard]] AlgoConfig config() const { return {variant, alpha, beta}; }
};

struct InitSpec {
  std::string kind = "zeros";  // or gaussian
  double scale = 1.0;
  std::uint64_t seed = 7;
};

struct ExperimentConfig {
  GraphSpec graph;
  DataSpec data;
  double lambda = 0.05;
  std::vector<AlgorithmSpec> algorithms;
  StopCriteria stopping;
  double newton_tol = 1e-12;
  InitSpec init;
  std::string output_dir = "out";

  /// Throws ConfigInvalid naming the offending field.
  void validate() const;
};

/// Parses key = value lines. '#' starts a comment. Throws ConfigInvalid with
/// the field path (or line number for malformed lines).
[[nodiscard]] ExperimentConfig parse_config(std::istream& in);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Environment variable that overrides output_dir when set and non-empty.
inline constexpr const char* kOutputDirEnv = "HBDN_OUTPUT_DIR";
[[nodiscard]] std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Everything the algorithms share: one W, one partition, one x0.
struct Problem {
  Topology topology;
  ConsensusMatrix weights;
  RawDataset data;
  Partition partition;
  GlobalObjective objective;
  SmoothnessConstants smoothness;
  NewtonResult reference;
  Eigen::MatrixXd x0;

  [[nodiscard]] ProblemConstants constants() const {
    return ProblemConstants::make(smoothness, weights);
  }
};

[[nodiscard]] Problem build_problem(const ExperimentConfig& cfg);

/// Shared start for all algorithms (zeros, or seeded Gaussian rows).
[[nodiscard]] Eigen::MatrixXd initial_iterate(const InitSpec& init, int n, int p);

struct AlgorithmOutcome {
  AlgorithmSpec spec;
  RunStatus status = RunStatus::MaxRounds;
  int rounds = 0;  // max_rounds + 1 when the stopping test never held
  double final_gap = 0.0;
  std::optional<RateFit> rate;
  std::optional<double> rho_m;  // rho(M(alpha, beta)) for the Newton variants
  bool certified = false;
  double wall_time = 0.0;
  std::string error;  // non-empty when the run threw
  RunTrace trace;
};

struct ComparisonSummary {
  ProblemConstants constants;
  double f_star = 0.0;
  std::vector<AlgorithmOutcome> outcomes;

  [[nodiscard]] bool any_diverged() const;
};

/// Rate fits on error norms skip this many rounds and stop at this floor.
inline constexpr int kRateBurnIn = 20;
inline constexpr double kRateFloor = 1e-12;
inline constexpr int kRateMinPoints = 30;

/// Rate fit of an error-norm sequence. The burn-in shrinks from kRateBurnIn
/// when that is needed to keep kRateMinPoints rounds above the floor.
[[nodiscard]] RateFit fit_error_rate(std::span<const double> norms);

/// Runs every configured algorithm; failures are recorded per algorithm.
[[nodiscard]] ComparisonSummary run_suite(const ExperimentConfig& cfg, const Problem& problem);

/// build_problem + run_suite, then writes trace_<name>.csv, summary.csv,
/// certificate.csv and region.csv under the resolved output directory.
ComparisonSummary run_experiment(const ExperimentConfig& cfg);

/// summary.csv contents; wall time is left out so the file is reproducible.
void write_summary_csv(std::ostream& out, const ComparisonSummary& summary);
/// One row per Newton-type algorithm with its certificate verdict.
void write_certificate_csv(std::ostream& out, const ComparisonSummary& summary,
                           const EpsilonCertificate& cert);

/// Human-readable certificate for (alpha, beta) on the problem's constants.
/// Returns whether the pair is certified.
bool print_certificate(std::ostream& out, const ProblemConstants& c, double alpha, double beta);

/// Prints rho_hat, R^2 and the fit window for a trace CSV.
/// Throws InsufficientTrace with fewer than kRateMinPoints usable rounds.
RateFit rate_report(std::ostream& out, const std::filesystem::path& trace_path);

/// Grid file: one "variant alpha beta" triple per line (commas allowed).
[[nodiscard]] std::vector<AlgoConfig> load_grid(const std::filesystem::path& path);

/// Runs every grid point on the config's problem, writes sweep.csv and
/// prints the best point per variant.
std::vector<SweepResult> run_sweep(std::ostream& out, const ExperimentConfig& cfg,
                                   const std::vector<AlgoConfig>& grid);

}  // namespace hbdn
