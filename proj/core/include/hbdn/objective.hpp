#pragma once

// Local objectives f_i with analytic derivatives, their aggregate
// f = (1/n) sum_i f_i, and a centralized Newton reference solver.

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace hbdn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Strong convexity and smoothness constants: mu I <= Hessian <= L I.
struct CurvatureBounds {
  double mu = 0.0;
  double lipschitz = 0.0;
};

class LocalObjective {
 public:
  virtual ~LocalObjective() = default;

  [[nodiscard]] virtual int dim() const noexcept = 0;
  [[nodiscard]] virtual double value(const Vector& x) const = 0;
  [[nodiscard]] virtual Vector gradient(const Vector& x) const = 0;
  [[nodiscard]] virtual Matrix hessian(const Vector& x) const = 0;
  [[nodiscard]] virtual CurvatureBounds constants() const = 0;

  /// Solves hessian(x) z = rhs by Cholesky. Throws FactorizationFailure when
  /// the Hessian is numerically not positive definite.
  [[nodiscard]] virtual Vector hessian_solve(const Vector& x, const Vector& rhs) const;

 protected:
  void check_dim(const Vector& v) const;
};

/// (1/m) sum_j log(1 + exp(-v_j x^T u_j)) + (lambda/2) ||x||^2.
class LogisticLocal final : public LocalObjective {
 public:
  /// `features` is m x p with rows u_j; `labels` entries must be +-1.
  LogisticLocal(Matrix features, Vector labels, double lambda);

  [[nodiscard]] int dim() const noexcept override { return static_cast<int>(features_.cols()); }
  [[nodiscard]] double value(const Vector& x) const override;
  [[nodiscard]] Vector gradient(const Vector& x) const override;
  [[nodiscard]] Matrix hessian(const Vector& x) const override;
  /// mu = lambda, L = lambda + lambda_max(U^T U) / (4 m).
  [[nodiscard]] CurvatureBounds constants() const override { return bounds_; }

  [[nodiscard]] const Matrix& features() const noexcept { return features_; }
  [[nodiscard]] const Vector& labels() const noexcept { return labels_; }
  [[nodiscard]] double lambda() const noexcept { return lambda_; }

 private:
  Matrix features_;
  Vector labels_;
  double lambda_;
  CurvatureBounds bounds_;
};

/// 0.5 x^T A x - b^T x with A symmetric positive definite.
class QuadraticLocal final : public LocalObjective {
 public:
  QuadraticLocal(Matrix a, Vector b);

  [[nodiscard]] int dim() const noexcept override { return static_cast<int>(b_.size()); }
  [[nodiscard]] double value(const Vector& x) const override;
  [[nodiscard]] Vector gradient(const Vector& x) const override;
  [[nodiscard]] Matrix hessian(const Vector& x) const override;
  [[nodiscard]] CurvatureBounds constants() const override { return bounds_; }
  [[nodiscard]] Vector hessian_solve(const Vector& x, const Vector& rhs) const override;

 private:
  Matrix a_;
  Vector b_;
  Eigen::LLT<Matrix> llt_;
  CurvatureBounds bounds_;
};

/// Global constants of the network problem: mu = min_i mu_i, L = max_i L_i.
struct SmoothnessConstants {
  double mu = 0.0;
  double lipschitz = 0.0;
  double condition_number = 0.0;
};

/// f(x) = (1/n) sum_i f_i(x) over a shared dimension p.
class GlobalObjective {
 public:
  explicit GlobalObjective(std::vector<std::shared_ptr<const LocalObjective>> locals);

  [[nodiscard]] int agents() const noexcept { return static_cast<int>(locals_.size()); }
  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] const LocalObjective& local(int i) const { return *locals_.at(i); }

  [[nodiscard]] double value(const Vector& x) const;
  [[nodiscard]] Vector gradient(const Vector& x) const;
  [[nodiscard]] Matrix hessian(const Vector& x) const;

 private:
  std::vector<std::shared_ptr<const LocalObjective>> locals_;
  int dim_;
};

[[nodiscard]] SmoothnessConstants smoothness_constants(const GlobalObjective& obj);

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration. Returns 0 for the zero matrix.
[[nodiscard]] double power_iteration_lambda_max(const Matrix& sym, double rel_tol = 1e-13,
                                                int max_iter = 100000);

/// log(1 + exp(z)) without overflow.
[[nodiscard]] double log1p_exp(double z) noexcept;
[[nodiscard]] double sigmoid(double z) noexcept;

struct NewtonOptions {
  double tol = 1e-12;
  double c1 = 1e-4;
  double rho = 0.5;
  int max_iterations = 200;
};

struct NewtonResult {
  Vector x_star;
  double f_star = 0.0;
  int iterations = 0;
  /// ||grad f(x_k)|| for k = 0..iterations.
  std::vector<double> grad_norms;
};

/// Full Newton steps on f with Armijo backtracking from the unit step.
/// Throws MaxIterations when the tolerance is not reached in time.
[[nodiscard]] NewtonResult centralized_newton(const GlobalObjective& obj, const Vector& x0,
                                              const NewtonOptions& opts = {});

}  // namespace hbdn
