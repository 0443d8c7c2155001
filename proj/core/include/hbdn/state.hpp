#pragma once

// Stacked network iterates and the per-round trace records built from them.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string_view>
#include <vector>

namespace hbdn {

/// Row i of every matrix belongs to agent i; columns are the p coordinates.
struct NetworkState {
  int t = 0;
  Eigen::MatrixXd x;       // X(t)
  Eigen::MatrixXd y;       // gradient tracker Y(t)
  Eigen::MatrixXd g;       // G(t) = grad F(X(t)) - grad F(X(t-1)), G(0) = Y(0)
  Eigen::MatrixXd v;       // momentum V(t) = X(t) - X(t-1)
  Eigen::MatrixXd d;       // descent directions D(t)
  Eigen::MatrixXd x_prev;  // X(t-1), with X(-1) = X(0)
  Eigen::MatrixXd grad;    // grad F(X(t)), cached for the next round's G

  [[nodiscard]] int agents() const noexcept { return static_cast<int>(x.rows()); }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(x.cols()); }
};

/// (consensus, tracking, optimality, momentum) errors of one round.
/// `optimality` is NaN when no reference optimum was supplied.
struct ErrorVector {
  double consensus = 0.0;
  double tracking = 0.0;
  double optimality = 0.0;
  double momentum = 0.0;

  [[nodiscard]] std::array<double, 4> as_array() const noexcept {
    return {consensus, tracking, optimality, momentum};
  }
  [[nodiscard]] bool has_optimality() const noexcept { return !std::isnan(optimality); }
  /// Euclidean norm over the components that are known.
  [[nodiscard]] double norm() const noexcept {
    double s = consensus * consensus + tracking * tracking + momentum * momentum;
    if (has_optimality()) s += optimality * optimality;
    return std::sqrt(s);
  }
};

struct RoundRecord {
  int round = 0;
  ErrorVector errors;
  double f_value = 0.0;    // f(xbar(t))
  double grad_norm = 0.0;  // ||(1/n) 1^T grad F(X(t))||
  double wall_time = 0.0;  // seconds since the run started
};

enum class RunStatus { Converged, MaxRounds, Diverged, FactorizationFailed };

[[nodiscard]] constexpr std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxRounds: return "max_rounds";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::FactorizationFailed: return "factorization_failed";
  }
  return "unknown";
}

struct RunTrace {
  std::vector<RoundRecord> records;
  RunStatus status = RunStatus::MaxRounds;

  [[nodiscard]] bool empty() const noexcept { return records.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
};

}  // namespace hbdn
