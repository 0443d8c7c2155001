#include "hbdn/experiment.hpp"

#include "hbdn/csv.hpp"
#include "hbdn/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace hbdn {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void put(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
  } else {
    out << v;
  }
}

Topology build_topology(const GraphSpec& g) {
  if (g.kind == "regular") return gen_regular(g.n, g.degree, g.seed);
  return gen_erdos_renyi(g.n, g.p, g.seed);
}

RawDataset build_data(const DataSpec& d) {
  RawDataset ds;
  if (d.source == "synthetic") {
    ds = synthesize(d.m, d.p, d.seed, d.separation);
  } else {
    DelimitedOptions opts;
    opts.label_column = d.label_column;
    opts.positive_label = d.positive_label;
    ds = load_delimited(std::filesystem::path(d.path), opts);
  }
  if (d.k_pca > 0) ds = pca_fit_transform(ds, d.k_pca, d.standardize).second;
  return ds;
}

GlobalObjective build_objective(const RawDataset& ds, const Partition& part, double lambda) {
  const auto locals_data = split(ds, part);
  std::vector<std::shared_ptr<const LocalObjective>> locals;
  locals.reserve(locals_data.size());
  for (const auto& local : locals_data) {
    locals.push_back(std::make_shared<LogisticLocal>(local.features, local.labels, lambda));
  }
  return GlobalObjective(std::move(locals));
}

struct Certification {
  std::optional<EpsilonCertificate> cert;
  std::optional<StepsizeRegion> region;
};

Certification certify_constants(const ProblemConstants& c) {
  Certification out;
  try {
    out.cert = find_epsilon(c);
    out.region = stepsize_bounds(*out.cert, c);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Infeasible && e.kind() != ErrorKind::EmptyRegion) throw;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd initial_iterate(const InitSpec& init, int n, int p) {
  if (init.kind == "zeros") return Eigen::MatrixXd::Zero(n, p);
  std::seed_seq seq{static_cast<std::uint32_t>(init.seed),
                    static_cast<std::uint32_t>(init.seed >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, init.scale);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
  }
  return x;
}

Problem build_problem(const ExperimentConfig& cfg) {
  cfg.validate();
  Topology topo = build_topology(cfg.graph);
  ConsensusMatrix w = metropolis_weights(topo);
  RawDataset ds = build_data(cfg.data);
  if (ds.samples() < cfg.graph.n) {
    throw Error(ErrorKind::ConfigInvalid, "data.m: fewer samples than agents");
  }
  Partition part = shuffle_partition(ds.samples(), cfg.graph.n, cfg.data.seed);
  GlobalObjective obj = build_objective(ds, part, cfg.lambda);
  const SmoothnessConstants smooth = smoothness_constants(obj);
  NewtonOptions nopts;
  nopts.tol = cfg.newton_tol;
  NewtonResult ref = centralized_newton(obj, Eigen::VectorXd::Zero(obj.dim()), nopts);
  Eigen::MatrixXd x0 = initial_iterate(cfg.init, cfg.graph.n, obj.dim());
  return Problem{std::move(topo), std::move(w),   std::move(ds),  std::move(part),
                 std::move(obj),  smooth,         std::move(ref), std::move(x0)};
}

bool ComparisonSummary::any_diverged() const {
  return std::any_of(outcomes.begin(), outcomes.end(), [](const AlgorithmOutcome& o) {
    return o.status == RunStatus::Diverged || o.status == RunStatus::FactorizationFailed;
  });
}

RateFit fit_error_rate(std::span<const double> norms) {
  std::size_t usable = 0;
  while (usable < norms.size() && std::isfinite(norms[usable]) && norms[usable] > kRateFloor) {
    ++usable;
  }
  const long spare = static_cast<long>(usable) - kRateMinPoints;
  const int burn_in = static_cast<int>(std::clamp<long>(spare, 0, kRateBurnIn));
  return fit_rate(norms, burn_in, kRateFloor, kRateMinPoints);
}

ComparisonSummary run_suite(const ExperimentConfig& cfg, const Problem& problem) {
  ComparisonSummary summary;
  summary.constants = problem.constants();
  summary.f_star = problem.reference.f_star;
  const Certification certification = certify_constants(summary.constants);

  RunOptions opts;
  opts.x_star = problem.reference.x_star;
  opts.f_star = problem.reference.f_star;

  for (const auto& spec : cfg.algorithms) {
    AlgorithmOutcome out;
    out.spec = spec;
    const AlgoConfig algo = spec.config();
    out.spec.beta = algo.beta();
    const auto start = std::chrono::steady_clock::now();
    try {
      NetworkState s0 = init(problem.objective, problem.x0, algo.variant());
      out.trace = run(std::move(s0), problem.weights, algo, problem.objective, cfg.stopping, opts);
      out.status = out.trace.status;
    } catch (const Error& e) {
      out.error = e.what();
      out.status = e.kind() == ErrorKind::FactorizationFailure ? RunStatus::FactorizationFailed
                                                               : RunStatus::Diverged;
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.rounds = rounds_to_tolerance(out.trace, cfg.stopping);
    out.final_gap = out.trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                                      : out.trace.records.back().f_value - summary.f_star;
    const auto norms = error_norms(out.trace);
    try {
      out.rate = fit_error_rate(norms);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientTrace) throw;
    }
    if (uses_newton_direction(spec.variant)) {
      out.rho_m = contraction_matrix(summary.constants, algo.alpha(), algo.beta()).rho;
      out.certified = certification.region && certification.region->certifies(algo.alpha(), algo.beta());
    }
    summary.outcomes.push_back(std::move(out));
  }
  return summary;
}

void write_summary_csv(std::ostream& out, const ComparisonSummary& summary) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "name,variant,alpha,beta,status,rounds,final_gap,rho_hat,r_squared,rho_m,certified\n";
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  for (const auto& o : summary.outcomes) {
    out << o.spec.name << ',' << to_string(o.spec.variant) << ',' << o.spec.alpha << ','
        << o.spec.beta << ',' << to_string(o.status) << ',' << o.rounds << ',';
    put(out, o.final_gap);
    out << ',';
    put(out, o.rate ? o.rate->rho_hat : kNaN);
    out << ',';
    put(out, o.rate ? o.rate->r_squared : kNaN);
    out << ',';
    put(out, o.rho_m.value_or(kNaN));
    out << ',' << (o.certified ? 1 : 0) << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

void write_certificate_csv(std::ostream& out, const ComparisonSummary& summary,
                           const EpsilonCertificate& cert) {
  const StepsizeRegion region = stepsize_bounds(cert, summary.constants);
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "name,variant,alpha,beta,eps1,eps2,eps3,eps4,eps_tilde,eps_bar,alpha_max,beta_max,rho,"
         "certified\n";
  for (const auto& o : summary.outcomes) {
    if (!uses_newton_direction(o.spec.variant)) continue;
    const double a = o.spec.alpha;
    const double b = o.spec.beta;
    out << o.spec.name << ',' << to_string(o.spec.variant) << ',' << a << ',' << b;
    for (int k = 0; k < 4; ++k) out << ',' << cert.eps(k);
    out << ',' << cert.eps_tilde << ',' << cert.eps_bar << ',' << region.alpha_max() << ','
        << region.beta_max(a) << ',' << contraction_matrix(summary.constants, a, b).rho << ','
        << (region.certifies(a, b) ? 1 : 0) << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

ComparisonSummary run_experiment(const ExperimentConfig& cfg) {
  const Problem problem = build_problem(cfg);
  ComparisonSummary summary = run_suite(cfg, problem);

  const auto dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(dir);
  for (const auto& o : summary.outcomes) {
    write_trace_csv(dir / ("trace_" + o.spec.name + ".csv"), o.trace);
  }
  {
    auto out = open_out(dir / "summary.csv");
    write_summary_csv(out, summary);
  }
  const Certification certification = certify_constants(summary.constants);
  if (certification.region) {
    {
      auto out = open_out(dir / "certificate.csv");
      write_certificate_csv(out, summary, *certification.cert);
    }
    const auto& region = *certification.region;
    std::vector<double> alphas;
    std::vector<double> betas;
    for (int k = 1; k <= 15; ++k) alphas.push_back(region.alpha_max() * k / 10.0);
    const double beta_ref = std::max(region.beta_max(0.5 * region.alpha_max()), 0.0);
    for (int k = 0; k <= 15; ++k) betas.push_back(beta_ref * k / 10.0);
    auto out = open_out(dir / "region.csv");
    write_region_csv(out, summary.constants, region, alphas, betas);
  }
  return summary;
}

bool print_certificate(std::ostream& out, const ProblemConstants& c, double alpha, double beta) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(10);
  out << "constants: mu=" << c.mu << " L=" << c.lipschitz << " Q=" << c.q << " sigma=" << c.sigma
      << " eta=" << c.eta << " n=" << c.n << '\n';
  out << "alpha=" << alpha << " beta=" << beta << '\n';

  bool certified = false;
  const Certification cz = certify_constants(c);
  if (cz.cert) {
    const auto& cert = *cz.cert;
    out << "eps=(" << cert.eps(0) << ", " << cert.eps(1) << ", " << cert.eps(2) << ", "
        << cert.eps(3) << ")\n";
    out << "eps_tilde=" << cert.eps_tilde << " eps_bar=" << cert.eps_bar << '\n';
  } else {
    out << "eps: no feasible certificate\n";
  }
  if (cz.region) {
    const auto& region = *cz.region;
    out << "alpha bounds:";
    for (double t : region.alpha_terms()) out << ' ' << t;
    out << "\nalpha_max=" << region.alpha_max() << '\n';
    out << "beta bounds at alpha:";
    for (double t : region.beta_terms(alpha)) out << ' ' << t;
    out << "\nbeta_max=" << region.beta_max(alpha) << '\n';
    certified = region.certifies(alpha, beta);
  } else {
    out << "step-size region: empty\n";
  }
  const auto cm = contraction_matrix(c, alpha, beta);
  out << "rho(M)=" << cm.rho << (cm.step_within_bound ? "" : " (alpha > mu/L: bound not guaranteed)")
      << '\n';
  const PerronRegion perron = perron_bounds(c);
  out << "perron region (rate 1 - alpha/(2Q)): "
      << (perron.certifies(alpha, beta) ? "inside" : "outside") << '\n';
  if (certified) {
    out << "verdict: CERTIFIED\n";
  } else {
    out << "verdict: UNCERTIFIED (outside the certified region; this does not imply divergence)\n";
  }
  out.flags(flags);
  out.precision(precision);
  return certified;
}

RateFit rate_report(std::ostream& out, const std::filesystem::path& trace_path) {
  const RunTrace trace = read_trace_csv(trace_path);
  const auto norms = error_norms(trace);
  const RateFit fit = fit_error_rate(norms);
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(10);
  out << "rho_hat=" << fit.rho_hat << '\n'
      << "r_squared=" << fit.r_squared << '\n'
      << "burn_in=" << fit.burn_in << '\n'
      << "window=" << fit.first_round << ".." << fit.last_round << '\n';
  out.flags(flags);
  out.precision(precision);
  return fit;
}

std::vector<AlgoConfig> load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open grid " + path.string());
  std::vector<AlgoConfig> grid;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string tok; ss >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() < 2 || tokens.size() > 3) {
      throw Error(ErrorKind::ParseError,
                  "grid line " + std::to_string(line_no) + ": expected variant alpha [beta]");
    }
    try {
      const Variant v = parse_variant(tokens[0]);
      const double a = std::stod(tokens[1]);
      const double b = tokens.size() == 3 ? std::stod(tokens[2]) : 0.0;
      grid.emplace_back(v, a, b);
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::ParseError, "grid line " + std::to_string(line_no) + ": bad number");
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError,
                  "grid line " + std::to_string(line_no) + ": " + std::string(e.what()));
    }
  }
  if (grid.empty()) throw Error(ErrorKind::ParseError, "grid file has no entries");
  return grid;
}

std::vector<SweepResult> run_sweep(std::ostream& out, const ExperimentConfig& cfg,
                                   const std::vector<AlgoConfig>& grid) {
  const Problem problem = build_problem(cfg);
  SweepSetup setup;
  setup.objective = &problem.objective;
  setup.weights = &problem.weights;
  setup.x0 = problem.x0;
  setup.stop = cfg.stopping;
  setup.x_star = problem.reference.x_star;
  setup.f_star = problem.reference.f_star;
  auto results = sweep(grid, setup);

  const auto dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(dir);
  {
    auto csv = open_out(dir / "sweep.csv");
    csv << "variant,alpha,beta,status,rounds\n";
    for (const auto& r : results) {
      csv << to_string(r.config.variant()) << ',' << r.config.alpha() << ',' << r.config.beta()
          << ',' << to_string(r.status) << ',' << r.rounds << '\n';
    }
  }

  std::map<std::string, std::vector<SweepResult>> by_variant;
  for (const auto& r : results) by_variant[std::string(to_string(r.config.variant()))].push_back(r);
  for (const auto& [name, rs] : by_variant) {
    const auto& best = best_of(rs);
    out << name << ": best alpha=" << best.config.alpha() << " beta=" << best.config.beta()
        << " rounds=" << best.rounds << " (" << to_string(best.status) << ")\n";
  }
  return results;
}

}  // namespace hbdn
