#pragma once

// Synchronous-round engine for the heavy-ball Newton-type recursion
//
//   X(t+1) = W X(t) - alpha D(t) + beta V(t)
//   G(t+1) = grad F(X(t+1)) - grad F(X(t))
//   Y(t+1) = W Y(t) + G(t+1)
//   V(t+1) = X(t+1) - X(t)
//
// with d_i(t) = [hess f_i(x_i(t))]^{-1} y_i(t) for the Newton variants and
// d_i(t) = y_i(t) for the gradient-tracking baselines.

#include "hbdn/graph.hpp"
#include "hbdn/objective.hpp"
#include "hbdn/state.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hbdn {

enum class Variant {
  NewtonHeavyBall,     // newton_hb
  Newton,              // newton: beta forced to 0
  GradTrack,           // grad_track: identity direction, beta forced to 0
  GradTrackHeavyBall,  // grad_track_hb
};

[[nodiscard]] std::string_view to_string(Variant v) noexcept;
/// Parses "newton_hb", "newton", "grad_track", "grad_track_hb".
[[nodiscard]] Variant parse_variant(std::string_view name);
[[nodiscard]] bool uses_newton_direction(Variant v) noexcept;

class AlgoConfig {
 public:
  /// Throws InvalidArgument unless alpha > 0 and beta >= 0. Variants without
  /// momentum silently force beta to zero.
  AlgoConfig(Variant variant, double alpha, double beta = 0.0);

  [[nodiscard]] Variant variant() const noexcept { return variant_; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }

  friend bool operator==(const AlgoConfig&, const AlgoConfig&) = default;

 private:
  Variant variant_;
  double alpha_;
  double beta_;
};

/// Rowwise grad F(X): row i is grad f_i(x_i).
[[nodiscard]] Eigen::MatrixXd stacked_gradient(const GlobalObjective& obj, const Eigen::MatrixXd& x);

/// Per-agent descent directions for `variant` at (X, Y).
[[nodiscard]] Eigen::MatrixXd descent_directions(const GlobalObjective& obj, Variant variant,
                                                 const Eigen::MatrixXd& x,
                                                 const Eigen::MatrixXd& y);

/// W * M computed agent by agent, summing neighbours in ascending index order.
[[nodiscard]] Eigen::MatrixXd mix(const Eigen::MatrixXd& w, const Eigen::MatrixXd& m);

/// Y(0) = grad F(X(0)), G(0) = Y(0), V(0) = 0, X(-1) = X(0).
[[nodiscard]] NetworkState init(const GlobalObjective& obj, const Eigen::MatrixXd& x0,
                                Variant variant = Variant::NewtonHeavyBall);

/// One synchronous round. Throws Divergence on non-finite iterates and
/// propagates FactorizationFailure from the local Hessian solves.
[[nodiscard]] NetworkState step(const NetworkState& state, const ConsensusMatrix& w,
                                const AlgoConfig& cfg, const GlobalObjective& obj);

inline constexpr double kDivergenceThreshold = 1e12;

struct StopCriteria {
  double grad_tol = 1e-8;  // <= 0 disables the gradient test
  int max_rounds = 1000;
  /// Optional f(xbar) - f* threshold; needs RunOptions::f_star.
  std::optional<double> f_gap_tol;
};

struct RunOptions {
  std::optional<Eigen::VectorXd> x_star;
  std::optional<double> f_star;
  /// Called with every recorded state, including round 0.
  std::function<void(const NetworkState&)> observer;
};

/// Steps until the stopping test holds or max_rounds is reached. The trace
/// holds one record per visited round, starting at round 0.
[[nodiscard]] RunTrace run(NetworkState state, const ConsensusMatrix& w, const AlgoConfig& cfg,
                           const GlobalObjective& obj, const StopCriteria& stop,
                           const RunOptions& opts = {});

/// Whether a record satisfies the stopping test.
[[nodiscard]] bool meets_stop(const RoundRecord& r, const StopCriteria& stop,
                              std::optional<double> f_star);

/// Round index at which the run converged, or max_rounds + 1.
[[nodiscard]] int rounds_to_tolerance(const RunTrace& trace, const StopCriteria& stop);

struct SweepSetup {
  const GlobalObjective* objective = nullptr;
  const ConsensusMatrix* weights = nullptr;
  Eigen::MatrixXd x0;
  StopCriteria stop;
  std::optional<Eigen::VectorXd> x_star;
  std::optional<double> f_star;
};

struct SweepResult {
  AlgoConfig config;
  int rounds = 0;  // max_rounds + 1 on failure
  RunStatus status = RunStatus::MaxRounds;
};

/// Runs every configuration from the same start, in grid order.
[[nodiscard]] std::vector<SweepResult> sweep(const std::vector<AlgoConfig>& grid,
                                             const SweepSetup& setup);

/// Best (fewest rounds) entry; ties keep the earlier grid position.
[[nodiscard]] const SweepResult& best_of(const std::vector<SweepResult>& results);

}  // namespace hbdn
