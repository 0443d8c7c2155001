#include "hbdn/algorithm.hpp"

#include "hbdn/error.hpp"
#include "hbdn/theory.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace hbdn {

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::NewtonHeavyBall: return "newton_hb";
    case Variant::Newton: return "newton";
    case Variant::GradTrack: return "grad_track";
    case Variant::GradTrackHeavyBall: return "grad_track_hb";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::NewtonHeavyBall, Variant::Newton, Variant::GradTrack,
                    Variant::GradTrackHeavyBall}) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown variant '" + std::string(name) + "'");
}

bool uses_newton_direction(Variant v) noexcept {
  return v == Variant::NewtonHeavyBall || v == Variant::Newton;
}

AlgoConfig::AlgoConfig(Variant variant, double alpha, double beta)
    : variant_(variant), alpha_(alpha), beta_(beta) {
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) {
    throw Error(ErrorKind::InvalidArgument, "step size alpha must be positive and finite");
  }
  if (!(beta_ >= 0.0) || !std::isfinite(beta_)) {
    throw Error(ErrorKind::InvalidArgument, "momentum beta must be nonnegative and finite");
  }
  if (variant_ == Variant::Newton || variant_ == Variant::GradTrack) beta_ = 0.0;
}

Eigen::MatrixXd stacked_gradient(const GlobalObjective& obj, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (int i = 0; i < obj.agents(); ++i) {
    out.row(i) = obj.local(i).gradient(x.row(i).transpose()).transpose();
  }
  return out;
}

Eigen::MatrixXd descent_directions(const GlobalObjective& obj, Variant variant,
                                   const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (!uses_newton_direction(variant)) return y;
  Eigen::MatrixXd d(x.rows(), x.cols());
  for (int i = 0; i < obj.agents(); ++i) {
    d.row(i) = obj.local(i).hessian_solve(x.row(i).transpose(), y.row(i).transpose()).transpose();
  }
  return d;
}

Eigen::MatrixXd mix(const Eigen::MatrixXd& w, const Eigen::MatrixXd& m) {
  if (w.cols() != m.rows()) throw Error(ErrorKind::DimensionMismatch, "W and state disagree");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(w.rows(), m.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double wij = w(i, j);
      if (wij != 0.0) out.row(i) += wij * m.row(j);
    }
  }
  return out;
}

NetworkState init(const GlobalObjective& obj, const Eigen::MatrixXd& x0, Variant variant) {
  if (x0.rows() != obj.agents() || x0.cols() != obj.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "x0 must be " + std::to_string(obj.agents()) + " x " + std::to_string(obj.dim()));
  }
  if (!x0.allFinite()) throw Error(ErrorKind::InvalidArgument, "x0 has non-finite entries");
  NetworkState s;
  s.t = 0;
  s.x = x0;
  s.x_prev = x0;
  s.grad = stacked_gradient(obj, x0);
  s.y = s.grad;
  s.g = s.y;
  s.v = Eigen::MatrixXd::Zero(x0.rows(), x0.cols());
  s.d = descent_directions(obj, variant, s.x, s.y);
  return s;
}

NetworkState step(const NetworkState& state, const ConsensusMatrix& w, const AlgoConfig& cfg,
                  const GlobalObjective& obj) {
  if (w.size() != state.agents()) {
    throw Error(ErrorKind::DimensionMismatch, "weight matrix size differs from agent count");
  }
  NetworkState next;
  next.t = state.t + 1;
  next.x = mix(w.w, state.x) - cfg.alpha() * state.d + cfg.beta() * state.v;
  if (!next.x.allFinite()) {
    throw Error(ErrorKind::Divergence, "non-finite iterate at round " + std::to_string(next.t));
  }
  next.grad = stacked_gradient(obj, next.x);
  next.g = next.grad - state.grad;
  next.y = mix(w.w, state.y) + next.g;
  next.v = next.x - state.x;
  next.x_prev = state.x;
  if (!next.y.allFinite()) {
    throw Error(ErrorKind::Divergence, "non-finite tracker at round " + std::to_string(next.t));
  }
  next.d = descent_directions(obj, cfg.variant(), next.x, next.y);
  return next;
}

bool meets_stop(const RoundRecord& r, const StopCriteria& stop, std::optional<double> f_star) {
  if (stop.grad_tol > 0.0 && r.grad_norm <= stop.grad_tol) return true;
  return stop.f_gap_tol && f_star && r.f_value - *f_star <= *stop.f_gap_tol;
}

RunTrace run(NetworkState state, const ConsensusMatrix& w, const AlgoConfig& cfg,
             const GlobalObjective& obj, const StopCriteria& stop, const RunOptions& opts) {
  if (!(stop.grad_tol > 0.0) && stop.max_rounds <= 0) {
    throw Error(ErrorKind::InvalidArgument, "need grad_tol > 0 or max_rounds > 0");
  }
  if (stop.max_rounds < 0) throw Error(ErrorKind::InvalidArgument, "max_rounds must be >= 0");
  if (stop.f_gap_tol && !opts.f_star) {
    throw Error(ErrorKind::InvalidArgument, "f_gap_tol needs a reference f_star");
  }

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const double inv_n = 1.0 / static_cast<double>(state.agents());

  RunTrace trace;
  for (;;) {
    if (opts.observer) opts.observer(state);

    RoundRecord rec;
    rec.round = state.t;
    rec.errors = error_vector(state, opts.x_star);
    const Eigen::VectorXd x_bar = state.x.colwise().sum().transpose() * inv_n;
    rec.f_value = obj.value(x_bar);
    rec.grad_norm = (state.grad.colwise().sum().transpose() * inv_n).norm();
    rec.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    trace.records.push_back(rec);

    if (!std::isfinite(rec.grad_norm) || rec.grad_norm > kDivergenceThreshold ||
        !std::isfinite(rec.f_value)) {
      trace.status = RunStatus::Diverged;
      break;
    }
    if (meets_stop(rec, stop, opts.f_star)) {
      trace.status = RunStatus::Converged;
      break;
    }
    if (state.t >= stop.max_rounds) {
      trace.status = RunStatus::MaxRounds;
      break;
    }
    try {
      state = step(state, w, cfg, obj);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Divergence) {
        trace.status = RunStatus::Diverged;
      } else if (e.kind() == ErrorKind::FactorizationFailure) {
        trace.status = RunStatus::FactorizationFailed;
      } else {
        throw;
      }
      break;
    }
  }
  return trace;
}

int rounds_to_tolerance(const RunTrace& trace, const StopCriteria& stop) {
  if (trace.status == RunStatus::Converged && !trace.empty()) return trace.records.back().round;
  return stop.max_rounds + 1;
}

std::vector<SweepResult> sweep(const std::vector<AlgoConfig>& grid, const SweepSetup& setup) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "sweep grid is empty");
  if (!setup.objective || !setup.weights) {
    throw Error(ErrorKind::InvalidArgument, "sweep setup needs objective and weights");
  }
  RunOptions opts;
  opts.x_star = setup.x_star;
  opts.f_star = setup.f_star;

  std::vector<SweepResult> results;
  results.reserve(grid.size());
  for (const auto& cfg : grid) {
    NetworkState s0 = init(*setup.objective, setup.x0, cfg.variant());
    const RunTrace trace = run(std::move(s0), *setup.weights, cfg, *setup.objective, setup.stop, opts);
    results.push_back({cfg, rounds_to_tolerance(trace, setup.stop), trace.status});
  }
  return results;
}

const SweepResult& best_of(const std::vector<SweepResult>& results) {
  if (results.empty()) throw Error(ErrorKind::InvalidArgument, "no sweep results");
  const SweepResult* best = &results.front();
  for (const auto& r : results) {
    if (r.rounds < best->rounds) best = &r;
  }
  return *best;
}

}  // namespace hbdn
