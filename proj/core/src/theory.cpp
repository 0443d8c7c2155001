#include "hbdn/theory.hpp"

#include "hbdn/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

namespace hbdn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::RowVectorXd column_mean(const Eigen::MatrixXd& m) {
  return m.colwise().sum() / static_cast<double>(m.rows());
}

void require_nonnegative(const Matrix4& m) {
  if (!m.allFinite() || (m.array() < 0.0).any()) {
    throw Error(ErrorKind::InvalidArgument, "matrix must be finite and nonnegative");
  }
}

PerronPair dense_perron(const Matrix4& m) {
  Eigen::EigenSolver<Matrix4> es(m);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::NonConvergence, "dense eigensolver failed on 4x4 matrix");
  }
  const auto values = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < values.size(); ++k) {
    const double mk = std::abs(values(k));
    const double mb = std::abs(values(best));
    // Among eigenvalues of maximal modulus prefer the real positive one.
    if (mk > mb * (1.0 + 1e-14) ||
        (mk >= mb * (1.0 - 1e-14) && values(k).real() > values(best).real())) {
      best = k;
    }
  }
  PerronPair p;
  p.root = std::abs(values(best));
  p.from_power_iteration = false;
  Vector4 vec = es.eigenvectors().col(best).real().cwiseAbs();
  const double s = vec.sum();
  p.vector = s > 0.0 ? Vector4(vec / s) : Vector4::Constant(0.25);
  return p;
}

#ifndef NDEBUG
double characteristic_residual(const Matrix4& m, double z) {
  const auto c = characteristic_polynomial(m);
  double value = 0.0;
  double scale = 0.0;
  double power = 1.0;
  for (double ck : c) {
    value += ck * power;
    scale += std::abs(ck * power);
    power *= z;
  }
  return scale > 0.0 ? std::abs(value) / scale : 0.0;
}
#endif

// The power-iteration root is only as accurate as the residual allows, and
// near-reducible inputs amplify that. A few guarded Newton steps on det(zI - M)
// recover full precision; a step is kept only if it is tiny and shrinks |p|.
double polish_root(const Matrix4& m, double z) {
  const auto c = characteristic_polynomial(m);
  const auto eval = [&](double t) {
    double p = c[4];
    double dp = 0.0;
    for (int k = 3; k >= 0; --k) {
      dp = dp * t + p;
      p = p * t + c[k];
    }
    return std::pair{p, dp};
  };
  for (int it = 0; it < 4; ++it) {
    const auto [p, dp] = eval(z);
    if (p == 0.0 || dp == 0.0) break;
    const double next = z - p / dp;
    if (std::abs(next - z) > 1e-8 * std::max(1.0, z)) break;
    if (std::abs(eval(next).first) >= std::abs(p)) break;
    z = next;
  }
  return z;
}

}  // namespace

ErrorVector error_vector(const NetworkState& state, const std::optional<Eigen::VectorXd>& x_star) {
  const Eigen::RowVectorXd x_bar = column_mean(state.x);
  const Eigen::RowVectorXd y_bar = column_mean(state.y);
  ErrorVector e;
  e.consensus = (state.x.rowwise() - x_bar).norm();
  e.tracking = (state.y.rowwise() - y_bar).norm();
  e.momentum = (state.x - state.x_prev).norm();
  if (x_star) {
    if (x_star->size() != state.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "x_star length differs from state dimension");
    }
    e.optimality = std::sqrt(static_cast<double>(state.agents())) *
                   (x_bar.transpose() - *x_star).norm();
  } else {
    e.optimality = std::numeric_limits<double>::quiet_NaN();
  }
  return e;
}

ProblemConstants ProblemConstants::make(double mu, double lipschitz, double sigma, double eta,
                                        int n) {
  if (!(mu > 0.0) || !(lipschitz >= mu) || !std::isfinite(lipschitz)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 < mu <= L < inf");
  }
  if (!(sigma >= 0.0 && sigma < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 <= sigma < 1 (connected network)");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw Error(ErrorKind::InvalidArgument, "need eta >= 0");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one agent");
  ProblemConstants c;
  c.mu = mu;
  c.lipschitz = lipschitz;
  c.q = lipschitz / mu;
  c.sigma = sigma;
  c.eta = eta;
  c.sigma_bar = 1.0 - sigma;
  c.n = n;
  return c;
}

ProblemConstants ProblemConstants::make(const SmoothnessConstants& s, const ConsensusMatrix& w) {
  return make(s.mu, s.lipschitz, w.sigma, w.eta, w.size());
}

Matrix4 contraction_entries(const ProblemConstants& c, double a, double b) {
  const double q = c.q;
  const double l = c.lipschitz;
  const double aq = a * q;
  const double a_mu = a / c.mu;
  Matrix4 m;
  m << c.sigma + aq,        a_mu,         aq,          b,
       l * (c.eta + aq),    c.sigma + aq, l * aq,      l * b,
       aq,                  a_mu,         1.0 - a / q, b,
       c.eta + aq,          a_mu,         aq,          b;
  return m;
}

ContractionMatrix contraction_matrix(const ProblemConstants& c, double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha and beta must be nonnegative");
  }
  ContractionMatrix cm;
  cm.m = contraction_entries(c, alpha, beta);
  cm.alpha = alpha;
  cm.beta = beta;
  cm.step_within_bound = alpha <= c.mu / c.lipschitz;
  // Past alpha = Q the (3,3) entry goes negative and Perron theory no
  // longer applies; the dense eigensolver still gives the spectral radius.
  if ((cm.m.array() < 0.0).any()) {
    Eigen::EigenSolver<Matrix4> es(cm.m, false);
    cm.rho = es.eigenvalues().cwiseAbs().maxCoeff();
  } else {
    cm.rho = spectral_radius(cm.m);
  }
  return cm;
}

std::array<double, 5> characteristic_polynomial(const Matrix4& a) {
  std::array<double, 5> c{};
  c[4] = 1.0;
  Matrix4 mk = Matrix4::Zero();
  for (int k = 1; k <= 4; ++k) {
    mk = a * mk + c[5 - k] * Matrix4::Identity();
    c[4 - k] = -(a * mk).trace() / k;
  }
  return c;
}

PerronPair perron_pair(const Matrix4& m) {
  require_nonnegative(m);
  if (m.cwiseAbs().maxCoeff() == 0.0) return {0.0, Vector4::Constant(0.25), true};

  // Non-uniform positive start so that symmetric cycles are not hit exactly.
  Vector4 x(1.0, 1.1, 1.2, 1.3);
  x /= x.sum();
  constexpr int kMaxIter = 100000;
  constexpr double kTol = 1e-12;
  for (int it = 0; it < kMaxIter; ++it) {
    const Vector4 y = m * x;
    const double lambda = y.sum();  // x >= 0 with unit 1-norm
    if (lambda == 0.0) return {0.0, x, true};
    const double residual = (y - lambda * x).lpNorm<1>();
    if (residual <= kTol * lambda) {
      PerronPair p{polish_root(m, lambda), y / lambda, true};
      assert(characteristic_residual(m, p.root) < 1e-8);
      return p;
    }
    x = y / lambda;
  }
  return dense_perron(m);
}

double spectral_radius(const Matrix4& m) { return perron_pair(m).root; }

double EpsilonCertificate::min_slack() const {
  double s = kInf;
  for (double b : eps1_bounds) s = std::min(s, b / eps(0) - 1.0);
  return s;
}

EpsilonCertificate EpsilonCertificate::scaled(double factor) const {
  if (!(factor > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale factor must be positive");
  EpsilonCertificate out = *this;
  out.eps *= factor;
  out.eps_tilde *= factor;
  out.eps_bar *= factor;
  for (double& b : out.eps1_bounds) b *= factor;
  return out;
}

EpsilonCertificate make_certificate(const ProblemConstants& c, const Vector4& eps) {
  if (!(eps.array() > 0.0).all() || !eps.allFinite()) {
    throw Error(ErrorKind::Infeasible, "eps components must be positive and finite");
  }
  const double q = c.q;
  const double l = c.lipschitz;
  EpsilonCertificate cert;
  cert.eps = eps;
  cert.eps_tilde = q * (eps(0) + eps(2)) + eps(1) / c.mu;
  cert.eps_bar = l * q * (eps(0) + eps(2)) + q * eps(1);
  cert.eps1_bounds = {
      c.eta > 0.0 ? c.sigma_bar * eps(1) / (l * c.eta) : kInf,
      eps(2) / (q * q) - eps(1) / (c.mu * q),
      c.eta > 0.0 ? eps(3) / c.eta : kInf,
  };
  for (double b : cert.eps1_bounds) {
    if (!(eps(0) < b)) {
      throw Error(ErrorKind::Infeasible, "eps1 violates one of its three upper bounds");
    }
  }
  return cert;
}

EpsilonCertificate find_epsilon(const ProblemConstants& c, double margin) {
  if (!(c.sigma < 1.0)) throw Error(ErrorKind::Infeasible, "sigma >= 1: network not mixing");
  if (!(margin > 0.0)) throw Error(ErrorKind::InvalidArgument, "margin must be positive");
  const double q = c.q;
  const double eps2 = 1.0;
  const double graph_bound = c.eta > 0.0 ? c.sigma_bar * eps2 / (c.lipschitz * c.eta) : kInf;
  const double base = std::isfinite(graph_bound) ? graph_bound : eps2 / (c.mu * q);
  const double lifted = (1.0 + margin) * base;

  const double eps3 = q * q * (eps2 / (c.mu * q) + lifted);
  const double eps4 = c.eta > 0.0 ? c.eta * lifted : lifted;
  const double tightest =
      std::min({graph_bound, eps3 / (q * q) - eps2 / (c.mu * q), c.eta > 0.0 ? eps4 / c.eta : kInf});
  const double eps1 = 0.5 * tightest;
  return make_certificate(c, Vector4(eps1, eps2, eps3, eps4));
}

StepsizeRegion::StepsizeRegion(const EpsilonCertificate& cert, const ProblemConstants& c)
    : cert_(cert), c_(c) {
  const auto& e = cert_.eps;
  const double sb = c_.sigma_bar;
  alpha_terms_ = {
      1.0 / c_.q,
      sb * e(0) / cert_.eps_tilde,
      (sb * e(1) - c_.lipschitz * c_.eta * e(0)) / cert_.eps_bar,
      (e(3) - c_.eta * e(0)) / cert_.eps_tilde,
  };
  alpha_max_ = *std::min_element(alpha_terms_.begin(), alpha_terms_.end());
  if (!(alpha_max_ > 0.0)) {
    throw Error(ErrorKind::EmptyRegion, "certificate admits no positive step size");
  }
}

std::array<double, 5> StepsizeRegion::beta_terms(double alpha) const {
  const auto& e = cert_.eps;
  const double sb = c_.sigma_bar;
  const double et = cert_.eps_tilde;
  const double eb = cert_.eps_bar;
  const double l = c_.lipschitz;
  return {
      et / e(3) * (sb * e(0) / et - alpha),
      et / e(3) * (sb * e(1) / et - alpha),
      eb / (l * e(3)) * ((sb * e(1) - l * c_.eta * e(0)) / eb - alpha),
      alpha / e(3) * (e(2) / c_.q - c_.q * e(0) - e(1) / c_.mu),
      et / e(3) * ((e(3) - c_.eta * e(0)) / et - alpha),
  };
}

double StepsizeRegion::beta_max(double alpha) const {
  const auto terms = beta_terms(alpha);
  return *std::min_element(terms.begin(), terms.end());
}

bool StepsizeRegion::certifies(double alpha, double beta) const {
  return alpha > 0.0 && alpha < alpha_max_ && beta >= 0.0 && beta < beta_max(alpha);
}

StepsizeRegion stepsize_bounds(const EpsilonCertificate& cert, const ProblemConstants& c) {
  return StepsizeRegion(cert, c);
}

PerronRegion::PerronRegion(const ProblemConstants& c, double rate_c) : c_(c), rate_c_(rate_c) {
  if (!(rate_c_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "rate constant c must be positive");
  const double q = c_.q;
  const double l = c_.lipschitz;
  const double inv_mu = 1.0 / c_.mu;
  m0_ = contraction_entries(c_, 0.0, 0.0);
  m1_ << q,     inv_mu, q,        0.0,
         l * q, q,      l * q,    0.0,
         q,     inv_mu, -1.0 / q, 0.0,
         q,     inv_mu, q,        0.0;
  m2_ << 0.0, 0.0, 0.0, 1.0,
         0.0, 0.0, 0.0, l,
         0.0, 0.0, 0.0, 1.0,
         0.0, 0.0, 0.0, 1.0;
  m0_perron_ = perron_pair(m0_);
  // Components left over from the power-iteration start decay like sigma^k and
  // sit near the stopping tolerance; they are not structural.
  m0_vector_positive_ = (m0_perron_.vector.array() > 1e-9).all();
}

double PerronRegion::target_rate(double alpha) const {
  return std::isinf(rate_c_) ? 1.0 : 1.0 - alpha / (rate_c_ * c_.q);
}

bool PerronRegion::certifies(double alpha, double beta) const {
  if (!(alpha > 0.0) || !(beta >= 0.0) || alpha > 1.0 / c_.q) return false;
  const Matrix4 m = m0_ + alpha * m1_ + beta * m2_;
  const PerronPair p = perron_pair(m);
  const Vector4& eps = p.vector;
  if (!(eps.array() > 0.0).all()) return p.root < target_rate(alpha);
  const Vector4 lhs = m0_ * eps + alpha * (m1_ * eps) + beta * (m2_ * eps);
  return (lhs.array() < target_rate(alpha) * eps.array()).all();
}

double PerronRegion::beta_max(double alpha) const {
  if (!certifies(alpha, 0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (certifies(alpha, hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) return lo;
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (certifies(alpha, mid) ? lo : hi) = mid;
  }
  return lo;
}

double PerronRegion::alpha_max() const {
  const double cap = 1.0 / c_.q;
  constexpr int kScan = 200;
  double good = 0.0;
  double bad = -1.0;
  for (int k = 1; k <= kScan; ++k) {
    const double a = cap * k / kScan;
    if (certifies(a, 0.0)) {
      good = a;
    } else {
      bad = a;
      break;
    }
  }
  if (bad < 0.0) return cap;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (good + bad);
    (certifies(mid, 0.0) ? good : bad) = mid;
  }
  return good;
}

PerronRegion perron_bounds(const ProblemConstants& c, double rate_c) {
  if (!(c.sigma < 1.0)) throw Error(ErrorKind::Infeasible, "sigma >= 1: network not mixing");
  return PerronRegion(c, rate_c);
}

RateFit fit_rate(std::span<const double> values, int burn_in, double floor, int min_points) {
  if (burn_in < 0) throw Error(ErrorKind::InvalidArgument, "burn-in must be nonnegative");
  const auto start = static_cast<std::size_t>(burn_in);
  std::size_t end = start;
  while (end < values.size() && std::isfinite(values[end]) && values[end] > floor) ++end;
  const auto count = end > start ? end - start : 0;
  if (count < static_cast<std::size_t>(std::max(min_points, 2))) {
    throw Error(ErrorKind::InsufficientTrace,
                "only " + std::to_string(count) + " rounds above the error floor after burn-in");
  }
  double st = 0.0;
  double sy = 0.0;
  for (std::size_t t = start; t < end; ++t) {
    st += static_cast<double>(t);
    sy += std::log(values[t]);
  }
  const double nn = static_cast<double>(count);
  const double t_mean = st / nn;
  const double y_mean = sy / nn;
  double stt = 0.0;
  double sty = 0.0;
  double syy = 0.0;
  for (std::size_t t = start; t < end; ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    const double dy = std::log(values[t]) - y_mean;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.slope = sty / stt;
  fit.intercept = y_mean - fit.slope * t_mean;
  fit.rho_hat = std::exp(fit.slope);
  const double ss_res = std::max(0.0, syy - fit.slope * sty);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.first_round = static_cast<int>(start);
  fit.last_round = static_cast<int>(end - 1);
  fit.burn_in = burn_in;
  return fit;
}

ContractionReport verify_contraction(const RunTrace& trace, const ContractionMatrix& m,
                                     const VerifyOptions& opts) {
  if (trace.size() < 2) throw Error(ErrorKind::InsufficientTrace, "need at least two rounds");
  for (const auto& r : trace.records) {
    if (!r.errors.has_optimality()) {
      throw Error(ErrorKind::InsufficientTrace, "trace lacks optimality errors (no x_star)");
    }
  }
  ContractionReport report;
  report.worst_excess = -kInf;
  for (std::size_t t = 0; t + 1 < trace.size(); ++t) {
    const auto cur = trace.records[t].errors.as_array();
    const auto nxt = trace.records[t + 1].errors.as_array();
    const Vector4 bound = m.m * Vector4(cur[0], cur[1], cur[2], cur[3]);
    for (int k = 0; k < 4; ++k) {
      const double excess = nxt[k] - bound(k);
      report.worst_excess = std::max(report.worst_excess, excess);
      if (excess > opts.slack && !report.first_violation) {
        report.first_violation = trace.records[t].round;
        report.violating_component = k;
        report.recursion_holds = false;
      }
    }
  }

  std::vector<double> norms;
  norms.reserve(trace.size());
  for (const auto& r : trace.records) norms.push_back(r.errors.norm());
  try {
    report.rate = fit_rate(norms, opts.burn_in, opts.floor, 3);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientTrace) throw;
  }
  if (opts.certified && m.step_within_bound && report.rate) {
    report.rate_ok = report.rate->rho_hat <= m.rho + opts.rate_slack;
  }
  return report;
}

void write_region_csv(std::ostream& out, const ProblemConstants& c, const StepsizeRegion& region,
                      std::span<const double> alphas, std::span<const double> betas) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "alpha,beta,rho,certified\n";
  for (double a : alphas) {
    for (double b : betas) {
      const auto cm = contraction_matrix(c, a, b);
      out << a << ',' << b << ',' << cm.rho << ',' << (region.certifies(a, b) ? 1 : 0) << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace hbdn
