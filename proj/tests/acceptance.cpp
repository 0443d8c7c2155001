// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every tolerance and time budget is fixed below.

#include "desk.hpp"
#include "oracles.hpp"

#include "hbdn/algorithm.hpp"
#include "hbdn/csv.hpp"
#include "hbdn/data.hpp"
#include "hbdn/error.hpp"
#include "hbdn/experiment.hpp"
#include "hbdn/graph.hpp"
#include "hbdn/objective.hpp"
#include "hbdn/theory.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#ifndef HBDN_CLI_PATH
#error "HBDN_CLI_PATH must name the hbdn executable"
#endif

using namespace hbdn;
namespace fs = std::filesystem;

namespace {

// Criterion 1
constexpr double kTrackingTol = 1e-9;
constexpr int kTrackingRounds = 1000;
constexpr double kBudget1 = 10.0;
// Criterion 2
constexpr double kRecursionSlack = 1e-9;
constexpr int kRecursionRounds = 500;
constexpr double kBudget2 = 10.0;
// Criterion 3
constexpr int kInstances = 10;
constexpr int kSamplesPerInstance = 100;
constexpr int kSoundnessRounds = 150;
constexpr int kSoundnessBurnIn = 20;
constexpr double kSoundnessFloor = 1e-10;
constexpr double kRateSlack = 0.02;
constexpr double kBudget3 = 300.0;
// Criteria 4 and 5
constexpr double kFGapTol = 1e-8;
constexpr int kSweepMaxRounds = 1000;
constexpr double kSpeedup = 1.5;
constexpr double kBudget4 = 120.0;
constexpr double kBudget5 = 120.0;
// Criterion 6
constexpr double kReductionTol = 1e-15;
constexpr int kReductionRounds = 100;
constexpr double kBudget6 = 5.0;
// Criterion 7
constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonMaxIterations = 30;
constexpr double kQuadraticRegion = 1e-3;
constexpr double kQuadraticBound = 10.0;
constexpr double kBudget7 = 2.0;
// Criterion 8
constexpr int kGraphs = 100;
constexpr double kStochasticTol = 1e-12;
constexpr int kQuarticMatrices = 1000;
constexpr double kQuarticTol = 1e-10;
constexpr double kFdTol = 1e-5;
constexpr double kPcaTol = 1e-10;
constexpr double kBudget8 = 60.0;

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double v = lo + k * step;
    if (v > hi + 1e-12) break;
    out.push_back(std::round(v * 1e6) / 1e6);
  }
  return out;
}

SweepSetup f_gap_setup(const Problem& p) {
  SweepSetup s;
  s.objective = &p.objective;
  s.weights = &p.weights;
  s.x0 = p.x0;
  s.stop.grad_tol = 0.0;
  s.stop.max_rounds = kSweepMaxRounds;
  s.stop.f_gap_tol = kFGapTol;
  s.f_star = p.reference.f_star;
  return s;
}

int best_rounds(const Problem& p, Variant v, const std::vector<double>& alphas,
                const std::vector<double>& betas, std::string* where = nullptr) {
  std::vector<AlgoConfig> grid;
  for (double a : alphas) {
    for (double b : betas) grid.emplace_back(v, a, b);
  }
  const auto results = sweep(grid, f_gap_setup(p));
  const auto& best = best_of(results);
  if (where) {
    *where = std::string(to_string(v)) + "(a=" + fmt(best.config.alpha()) +
             ",b=" + fmt(best.config.beta()) + ")";
  }
  return best.rounds;
}

Verdict tracking_exactness() {
  const auto start = Clock::now();
  const auto& p = desk::regular();
  StopCriteria stop;
  stop.grad_tol = 0.0;
  stop.max_rounds = kTrackingRounds;
  double worst = 0.0;
  int seen = 0;
  RunOptions opts;
  opts.observer = [&](const NetworkState& s) {
    const Eigen::RowVectorXd y_bar = s.y.colwise().mean();
    const Eigen::RowVectorXd g_bar = stacked_gradient(p.objective, s.x).colwise().mean();
    worst = std::max(worst, (y_bar - g_bar).norm());
    ++seen;
  };
  const auto trace = run(init(p.objective, p.x0), p.weights,
                         AlgoConfig(Variant::NewtonHeavyBall, 0.15, 0.5), p.objective, stop, opts);
  const double t = seconds_since(start);
  const bool ok = seen == kTrackingRounds + 1 && worst <= kTrackingTol && t < kBudget1;
  return {ok, "rounds=" + std::to_string(seen - 1) + " max|ybar-gradbar|=" + fmt(worst) +
                  " time=" + fmt(t) + "s"};
}

Verdict proposition_recursion() {
  const auto start = Clock::now();
  const auto& p = desk::regular();
  const auto c = p.constants();
  const double alpha = c.mu / c.lipschitz;
  bool ok = true;
  std::string detail;
  for (double beta : {0.0, 0.3, 0.9}) {
    StopCriteria stop;
    stop.grad_tol = 0.0;
    stop.max_rounds = kRecursionRounds;
    RunOptions opts;
    opts.x_star = p.reference.x_star;
    const auto trace = run(init(p.objective, p.x0), p.weights,
                           AlgoConfig(Variant::NewtonHeavyBall, alpha, beta), p.objective, stop, opts);
    VerifyOptions vo;
    vo.slack = kRecursionSlack;
    const auto report = verify_contraction(trace, contraction_matrix(c, alpha, beta), vo);
    const bool full = static_cast<int>(trace.size()) == kRecursionRounds + 1;
    ok = ok && full && report.recursion_holds;
    detail += "beta=" + fmt(beta) + ":" + (report.recursion_holds ? "ok" : "violated") +
              "(excess=" + fmt(report.worst_excess) + ") ";
  }
  const double t = seconds_since(start);
  ok = ok && t < kBudget2;
  return {ok, "alpha=mu/L=" + fmt(alpha) + " " + detail + "time=" + fmt(t) + "s"};
}

Verdict certificate_soundness() {
  const auto start = Clock::now();
  int certified_rho = 0;
  int rate_ok = 0;
  int total = 0;
  double worst_gap = -1.0;
  std::mt19937_64 rng(2024);
  for (int inst = 0; inst < kInstances; ++inst) {
    const std::string kind = inst % 2 == 0 ? "regular" : "erdos_renyi";
    const auto cfg = desk::config(kind, 100 + inst, 500 + inst);
    const Problem p = build_problem(cfg);
    const auto c = p.constants();
    const auto region = stepsize_bounds(find_epsilon(c), c);
    StopCriteria stop;
    stop.grad_tol = 0.0;
    stop.max_rounds = kSoundnessRounds;
    RunOptions opts;
    opts.x_star = p.reference.x_star;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < kSamplesPerInstance; ++s) {
      double alpha = 0.0;
      while (alpha <= 0.0) alpha = unit(rng) * region.alpha_max();
      const double beta = unit(rng) * region.beta_max(alpha);
      if (!region.certifies(alpha, beta)) continue;  // counted as a failure below
      ++total;
      const auto m = contraction_matrix(c, alpha, beta);
      if (m.rho < 1.0) ++certified_rho;
      const auto trace = run(init(p.objective, p.x0), p.weights,
                             AlgoConfig(Variant::NewtonHeavyBall, alpha, beta), p.objective, stop,
                             opts);
      const auto norms = error_norms(trace);
      const auto fit = fit_rate(norms, kSoundnessBurnIn, kSoundnessFloor);
      worst_gap = std::max(worst_gap, fit.rho_hat - m.rho);
      if (fit.rho_hat <= m.rho + kRateSlack) ++rate_ok;
    }
  }
  const int expected = kInstances * kSamplesPerInstance;
  const double t = seconds_since(start);
  const bool ok = total == expected && certified_rho == expected && rate_ok == expected && t < kBudget3;
  return {ok, "samples=" + std::to_string(total) + "/" + std::to_string(expected) +
                  " rho<1:" + std::to_string(certified_rho) + " rate_ok:" + std::to_string(rate_ok) +
                  " max(rho_hat-rho)=" + fmt(worst_gap) + " time=" + fmt(t) + "s"};
}

Verdict acceleration() {
  const auto start = Clock::now();
  const auto& p = desk::regular();
  const auto alphas = range(0.05, 0.9, 0.05);
  const auto betas = range(0.0, 0.8, 0.1);
  std::string hb_at;
  std::string nw_at;
  const int hb = best_rounds(p, Variant::NewtonHeavyBall, alphas, betas, &hb_at);
  const int nw = best_rounds(p, Variant::Newton, alphas, {0.0}, &nw_at);
  const double t = seconds_since(start);
  const bool ok = hb <= kSweepMaxRounds && hb <= nw / kSpeedup && t < kBudget4;
  return {ok, hb_at + "=" + std::to_string(hb) + " " + nw_at + "=" + std::to_string(nw) +
                  " ratio=" + fmt(static_cast<double>(nw) / hb) + " time=" + fmt(t) + "s"};
}

Verdict baseline_ordering() {
  const auto start = Clock::now();
  const auto newton_alphas = range(0.05, 0.9, 0.05);
  auto gt_alphas = newton_alphas;
  for (double a : {1.0, 1.25, 1.5, 2.0, 2.5, 3.0}) gt_alphas.push_back(a);
  bool ok = true;
  std::string detail;
  for (const auto& [kind, seed] : {std::pair<std::string, std::uint64_t>{"regular", 1},
                                   std::pair<std::string, std::uint64_t>{"erdos_renyi", desk::kErSeed}}) {
    const Problem p = build_problem(desk::config(kind, seed));
    std::string nw_at;
    std::string gt_at;
    const int nw = best_rounds(p, Variant::Newton, newton_alphas, {0.0}, &nw_at);
    const int gt = best_rounds(p, Variant::GradTrack, gt_alphas, {0.0}, &gt_at);
    ok = ok && nw <= kSweepMaxRounds && nw < gt;
    detail += kind + "(sigma=" + fmt(p.weights.sigma) + "): " + nw_at + "=" + std::to_string(nw) +
              " " + gt_at + "=" + std::to_string(gt) + "; ";
  }
  const double t = seconds_since(start);
  ok = ok && t < kBudget5;
  return {ok, detail + "time=" + fmt(t) + "s"};
}

Verdict beta_zero_reduction() {
  const auto start = Clock::now();
  const auto& p = desk::regular();
  auto s = init(p.objective, p.x0);
  const double alpha = 0.3;
  const AlgoConfig cfg(Variant::NewtonHeavyBall, alpha, 0.0);
  for (int t = 0; t < kReductionRounds; ++t) s = step(s, p.weights, cfg, p.objective);
  const Eigen::MatrixXd ref = oracle::plain_newton_loop(p.objective, p.weights.w, p.x0, alpha, kReductionRounds);
  const double rel = (s.x - ref).norm() / ref.norm();
  const double t = seconds_since(start);
  return {rel <= kReductionTol && t < kBudget6, "relative diff=" + fmt(rel) + " time=" + fmt(t) + "s"};
}

Verdict centralized_reference() {
  const auto& desk_problem = desk::regular();
  const auto start = Clock::now();
  NewtonOptions opts;
  opts.tol = kNewtonTol;
  const auto r = centralized_newton(desk_problem.objective, Eigen::VectorXd::Zero(10), opts);
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < r.grad_norms.size(); ++k) {
    const double g = r.grad_norms[k];
    if (g <= kQuadraticRegion && r.grad_norms[k + 1] > 0.0) {
      worst_ratio = std::max(worst_ratio, r.grad_norms[k + 1] / (g * g));
    }
  }
  const double t = seconds_since(start);
  const double final_grad = desk_problem.objective.gradient(r.x_star).norm();
  const bool ok = final_grad <= kNewtonTol && r.iterations <= kNewtonMaxIterations &&
                  worst_ratio < kQuadraticBound && t < kBudget7;
  return {ok, "iterations=" + std::to_string(r.iterations) + " |grad|=" + fmt(final_grad) +
                  " max g_{k+1}/g_k^2=" + fmt(worst_ratio) + " time=" + fmt(t) + "s"};
}

Verdict infrastructure() {
  const auto start = Clock::now();
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal(0.0, 1.0);

  int graphs_ok = 0;
  for (int k = 0; k < kGraphs; ++k) {
    const auto seed = static_cast<std::uint64_t>(k);
    const Topology t = k % 2 == 0 ? gen_erdos_renyi(12 + k % 9, 0.4, seed)
                                  : gen_regular(10 + 2 * (k % 6), 3 + k % 3 * 2, seed);
    const auto cm = metropolis_weights(t);
    if (stochasticity_defect(cm.w) <= kStochasticTol && cm.sigma < 1.0) ++graphs_ok;
  }

  int quartic_ok = 0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < kQuarticMatrices; ++k) {
    Eigen::Matrix4d a;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) a(i, j) = unit(rng) < 0.25 ? 0.0 : unit(rng) * 3.0;
    }
    const double expected = oracle::quartic_spectral_radius(a);
    if (std::abs(spectral_radius(a) - expected) <= kQuarticTol * std::max(1.0, expected)) ++quartic_ok;
  }

  int fd_ok = 0;
  int fd_total = 0;
  const auto& p = desk::regular();
  for (int i = 0; i < p.objective.agents(); i += 4) {
    const auto& f = p.objective.local(i);
    Eigen::VectorXd x(10);
    for (int k = 0; k < 10; ++k) x(k) = normal(rng);
    const Eigen::VectorXd g = f.gradient(x);
    const Eigen::VectorXd dir = Eigen::VectorXd::NullaryExpr(10, [&] { return normal(rng); }).normalized();
    const Eigen::VectorXd hv = f.hessian(x) * dir;
    fd_total += 2;
    if ((g - oracle::fd_gradient(f, x)).norm() <= kFdTol * std::max(1.0, g.norm())) ++fd_ok;
    if ((hv - oracle::fd_hessian_vec(f, x, dir)).norm() <= kFdTol * std::max(1.0, hv.norm())) ++fd_ok;
  }

  RawDataset ds;
  ds.features.resize(200, 6);
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 6; ++j) ds.features(i, j) = normal(rng) * (1.0 + j);
  }
  ds.labels = Eigen::VectorXd::Ones(200);
  const auto [model, reduced] = pca_fit_transform(ds, 6);
  const double pca_err = (model.inverse_transform(reduced.features) - ds.features).cwiseAbs().maxCoeff();

  const double t = seconds_since(start);
  const bool ok = graphs_ok == kGraphs && quartic_ok == kQuarticMatrices && fd_ok == fd_total &&
                  pca_err <= kPcaTol && t < kBudget8;
  return {ok, "graphs " + std::to_string(graphs_ok) + "/" + std::to_string(kGraphs) + ", quartic " +
                  std::to_string(quartic_ok) + "/" + std::to_string(kQuarticMatrices) + ", fd " +
                  std::to_string(fd_ok) + "/" + std::to_string(fd_total) + ", pca err " + fmt(pca_err) +
                  ", time=" + fmt(t) + "s"};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "hbdn_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config = root / "run.cfg";
  {
    std::ofstream out(config);
    out << "graph.kind = regular\ngraph.n = 20\ngraph.degree = 14\ngraph.seed = 1\n"
           "data.m = 4000\ndata.p = 10\ndata.seed = 42\nobjective.lambda = 0.05\n"
           "algorithm.hb.variant = newton_hb\nalgorithm.hb.alpha = 0.15\nalgorithm.hb.beta = 0.5\n"
           "algorithm.giant.variant = newton\nalgorithm.giant.alpha = 0.3\n"
           "algorithm.gt.variant = grad_track\nalgorithm.gt.alpha = 1.0\n"
           "stopping.grad_tol = 1e-10\nstopping.max_rounds = 300\n";
  }
  std::vector<fs::path> dirs;
  for (const char* tag : {"a", "b"}) {
    const fs::path dir = root / tag;
    dirs.push_back(dir);
    const std::string cmd = std::string(kOutputDirEnv) + "='" + dir.string() + "' '" + HBDN_CLI_PATH +
                            "' run '" + config.string() + "' > '" + (root / tag).string() + ".log' 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) return {false, "cli exited with status " + std::to_string(rc)};
  }
  int compared = 0;
  for (const char* f : {"trace_hb.csv", "trace_giant.csv", "trace_gt.csv", "summary.csv"}) {
    const auto a = dirs[0] / f;
    const auto b = dirs[1] / f;
    if (!fs::exists(a) || !fs::exists(b)) return {false, std::string("missing ") + f};
    if (slurp(a) != slurp(b)) return {false, std::string(f) + " differs"};
    ++compared;
  }
  fs::remove_all(root);
  return {true, std::to_string(compared) + " files byte-identical across two runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"gradient tracking exactness", tracking_exactness},
      {"error recursion bound", proposition_recursion},
      {"certificate soundness", certificate_soundness},
      {"momentum acceleration", acceleration},
      {"baseline ordering", baseline_ordering},
      {"beta = 0 reduction", beta_zero_reduction},
      {"centralized reference", centralized_reference},
      {"infrastructure properties", infrastructure},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  [" << (k + 1) << "] " << criteria[k].first << ": "
              << v.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
