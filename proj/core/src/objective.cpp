#include "hbdn/objective.hpp"

#include "hbdn/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace hbdn {

double log1p_exp(double z) noexcept {
  if (z > 30.0) return z + std::log1p(std::exp(-z));
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void LocalObjective::check_dim(const Vector& v) const {
  if (v.size() != dim()) {
    throw Error(ErrorKind::DimensionMismatch, "expected length " + std::to_string(dim()) +
                                                  ", got " + std::to_string(v.size()));
  }
}

Vector LocalObjective::hessian_solve(const Vector& x, const Vector& rhs) const {
  check_dim(rhs);
  Eigen::LLT<Matrix> llt(hessian(x));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::FactorizationFailure, "Hessian is not numerically positive definite");
  }
  return llt.solve(rhs);
}

LogisticLocal::LogisticLocal(Matrix features, Vector labels, double lambda)
    : features_(std::move(features)), labels_(std::move(labels)), lambda_(lambda) {
  if (features_.rows() != labels_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one label per feature row required");
  }
  if (features_.rows() == 0 || features_.cols() == 0) {
    throw Error(ErrorKind::InvalidArgument, "logistic objective needs samples and features");
  }
  if (!(lambda_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "regularizer must be positive");
  for (Eigen::Index j = 0; j < labels_.size(); ++j) {
    if (labels_(j) != 1.0 && labels_(j) != -1.0) {
      throw Error(ErrorKind::InvalidArgument, "labels must be +1 or -1");
    }
  }
  const double m = static_cast<double>(features_.rows());
  const Matrix gram = features_.transpose() * features_;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  // sigmoid'(z) = s(1 - s) <= 1/4
  bounds_ = {lambda_, lambda_ + std::max(top, 0.0) / (4.0 * m)};
}

double LogisticLocal::value(const Vector& x) const {
  check_dim(x);
  const Vector margins = (features_ * x).cwiseProduct(labels_);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < margins.size(); ++j) loss += log1p_exp(-margins(j));
  return loss / static_cast<double>(margins.size()) + 0.5 * lambda_ * x.squaredNorm();
}

Vector LogisticLocal::gradient(const Vector& x) const {
  check_dim(x);
  const Vector margins = (features_ * x).cwiseProduct(labels_);
  Vector weights(margins.size());
  for (Eigen::Index j = 0; j < margins.size(); ++j) {
    weights(j) = -labels_(j) * sigmoid(-margins(j));
  }
  return features_.transpose() * weights / static_cast<double>(margins.size()) + lambda_ * x;
}

Matrix LogisticLocal::hessian(const Vector& x) const {
  check_dim(x);
  const Vector scores = features_ * x;
  Vector curvature(scores.size());
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    const double s = sigmoid(scores(j));
    curvature(j) = s * (1.0 - s);
  }
  const double m = static_cast<double>(scores.size());
  Matrix h = Matrix::Identity(dim(), dim()) * lambda_;
  h.selfadjointView<Eigen::Lower>().rankUpdate(
      (features_.transpose() * (curvature.array().sqrt() / std::sqrt(m)).matrix().asDiagonal()));
  return h.selfadjointView<Eigen::Lower>();
}

QuadraticLocal::QuadraticLocal(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "quadratic needs square A matching b");
  }
  if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + a_.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::InvalidArgument, "quadratic matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(a_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "quadratic matrix must be positive definite");
  }
  bounds_ = {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  llt_.compute(a_);
}

double QuadraticLocal::value(const Vector& x) const {
  check_dim(x);
  return 0.5 * x.dot(a_ * x) - b_.dot(x);
}

Vector QuadraticLocal::gradient(const Vector& x) const {
  check_dim(x);
  return a_ * x - b_;
}

Matrix QuadraticLocal::hessian(const Vector& x) const {
  check_dim(x);
  return a_;
}

Vector QuadraticLocal::hessian_solve(const Vector& x, const Vector& rhs) const {
  check_dim(x);
  check_dim(rhs);
  return llt_.solve(rhs);
}

GlobalObjective::GlobalObjective(std::vector<std::shared_ptr<const LocalObjective>> locals)
    : locals_(std::move(locals)), dim_(0) {
  if (locals_.empty()) throw Error(ErrorKind::InvalidArgument, "at least one local objective");
  dim_ = locals_.front()->dim();
  for (const auto& f : locals_) {
    if (!f) throw Error(ErrorKind::InvalidArgument, "null local objective");
    if (f->dim() != dim_) {
      throw Error(ErrorKind::DimensionMismatch, "local objectives disagree on dimension");
    }
  }
}

double GlobalObjective::value(const Vector& x) const {
  double total = 0.0;
  for (const auto& f : locals_) total += f->value(x);
  return total / static_cast<double>(locals_.size());
}

Vector GlobalObjective::gradient(const Vector& x) const {
  Vector total = Vector::Zero(dim_);
  for (const auto& f : locals_) total += f->gradient(x);
  return total / static_cast<double>(locals_.size());
}

Matrix GlobalObjective::hessian(const Vector& x) const {
  Matrix total = Matrix::Zero(dim_, dim_);
  for (const auto& f : locals_) total += f->hessian(x);
  return total / static_cast<double>(locals_.size());
}

SmoothnessConstants smoothness_constants(const GlobalObjective& obj) {
  SmoothnessConstants c;
  c.mu = obj.local(0).constants().mu;
  c.lipschitz = obj.local(0).constants().lipschitz;
  for (int i = 1; i < obj.agents(); ++i) {
    const auto b = obj.local(i).constants();
    c.mu = std::min(c.mu, b.mu);
    c.lipschitz = std::max(c.lipschitz, b.lipschitz);
  }
  c.condition_number = c.lipschitz / c.mu;
  return c;
}

double power_iteration_lambda_max(const Matrix& sym, double rel_tol, int max_iter) {
  if (sym.rows() != sym.cols()) throw Error(ErrorKind::DimensionMismatch, "square matrix needed");
  if (sym.size() == 0 || sym.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Vector v = Vector::LinSpaced(sym.rows(), 1.0, 2.0).normalized();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = sym * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(next - lambda) <= rel_tol * std::abs(next)) return next;
    lambda = next;
  }
  throw Error(ErrorKind::NonConvergence, "power iteration did not converge");
}

NewtonResult centralized_newton(const GlobalObjective& obj, const Vector& x0,
                                const NewtonOptions& opts) {
  if (!(opts.tol > 0.0) || !(opts.c1 > 0.0 && opts.c1 < 0.5) ||
      !(opts.rho > 0.0 && opts.rho < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "need tol > 0, 0 < c1 < 0.5, 0 < rho < 1");
  }
  if (x0.size() != obj.dim()) throw Error(ErrorKind::DimensionMismatch, "x0 has wrong length");

  NewtonResult result;
  Vector x = x0;
  double fx = obj.value(x);
  for (int k = 0;; ++k) {
    const Vector g = obj.gradient(x);
    result.grad_norms.push_back(g.norm());
    if (g.norm() <= opts.tol) {
      result.iterations = k;
      break;
    }
    if (k == opts.max_iterations) {
      throw Error(ErrorKind::MaxIterations,
                  "Newton did not reach ||grad|| <= tol in " + std::to_string(k) + " iterations");
    }
    Eigen::LLT<Matrix> llt(obj.hessian(x));
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::FactorizationFailure, "global Hessian not positive definite");
    }
    const Vector step = -llt.solve(g);
    const double slope = g.dot(step);

    double t = 1.0;
    Vector trial = x + step;
    double f_trial = obj.value(trial);
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      if (f_trial <= fx + opts.c1 * t * slope) break;
      // Predicted decrease below the resolution of f: the unit step is as good
      // as any and backtracking would only stall.
      if (std::abs(opts.c1 * t * slope) < 1e-15 * std::max(1.0, std::abs(fx))) break;
      t *= opts.rho;
      trial = x + t * step;
      f_trial = obj.value(trial);
    }
    x = std::move(trial);
    fx = f_trial;
  }
  result.x_star = x;
  result.f_star = fx;
  return result;
}

}  // namespace hbdn
