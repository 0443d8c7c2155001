#pragma once

// Linear-convergence certificates for the heavy-ball Newton recursion.
//
// The error vector e = (consensus, tracking, optimality, momentum) obeys
// e(t+1) <= M(alpha, beta) e(t) elementwise whenever alpha <= mu/L, where
//
//        | sigma + aQ       a/mu          aQ         b   |
//   M =  | L(eta + aQ)      sigma + aQ    L a Q      L b |
//        | aQ               a/mu          1 - a/Q    b   |
//        | eta + aQ         a/mu          aQ         b   |
//
// with Q = L/mu, sigma = ||W - 11^T/n||_2 and eta = ||W - I||_2. A positive
// vector eps with M eps < eps proves rho(M) < 1.

#include "hbdn/graph.hpp"
#include "hbdn/objective.hpp"
#include "hbdn/state.hpp"

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace hbdn {

using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;

/// Errors of `state` against the reference optimum. Pass std::nullopt to
/// leave the optimality component as NaN.
[[nodiscard]] ErrorVector error_vector(const NetworkState& state,
                                       const std::optional<Eigen::VectorXd>& x_star);

struct ProblemConstants {
  double mu = 0.0;
  double lipschitz = 0.0;
  double q = 0.0;  // condition number L / mu
  double sigma = 0.0;
  double eta = 0.0;
  double sigma_bar = 1.0;  // 1 - sigma
  int n = 0;

  /// Validates 0 < mu <= L, 0 <= sigma < 1 and eta >= 0.
  static ProblemConstants make(double mu, double lipschitz, double sigma, double eta, int n);
  static ProblemConstants make(const SmoothnessConstants& s, const ConsensusMatrix& w);
};

struct ContractionMatrix {
  Matrix4 m;
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  /// alpha <= mu / L, the regime in which the recursion is guaranteed.
  bool step_within_bound = false;
};

/// Entries of M(alpha, beta) without the spectral radius.
[[nodiscard]] Matrix4 contraction_entries(const ProblemConstants& c, double alpha, double beta);

/// Throws InvalidArgument for alpha < 0 or beta < 0. alpha > mu/L is allowed
/// and reported through `step_within_bound`.
[[nodiscard]] ContractionMatrix contraction_matrix(const ProblemConstants& c, double alpha,
                                                   double beta);

struct PerronPair {
  double root = 0.0;
  Vector4 vector = Vector4::Zero();  // unit 1-norm, nonnegative
  bool from_power_iteration = true;  // false when the direct eigensolver was used
};

/// Perron root and vector of a nonnegative 4x4 matrix. Power iteration with
/// a residual test at relative tolerance 1e-12 and a 1e5 iteration cap;
/// cyclic or slowly mixing inputs fall back to a dense eigensolver. The root
/// is polished by Newton steps on the characteristic polynomial.
[[nodiscard]] PerronPair perron_pair(const Matrix4& m);
[[nodiscard]] double spectral_radius(const Matrix4& m);

/// Coefficients c0..c4 of det(zI - M) = z^4 + c3 z^3 + c2 z^2 + c1 z + c0,
/// ascending order, via Faddeev-LeVerrier.
[[nodiscard]] std::array<double, 5> characteristic_polynomial(const Matrix4& m);

/// A strictly feasible eps for
///   eps1 < min{ sigma_bar eps2/(L eta), eps3/Q^2 - eps2/(mu Q), eps4/eta }.
struct EpsilonCertificate {
  Vector4 eps = Vector4::Zero();
  double eps_tilde = 0.0;  // Q(eps1 + eps3) + eps2/mu
  double eps_bar = 0.0;    // L Q (eps1 + eps3) + Q eps2
  /// The three upper bounds on eps1; +inf when eta == 0 makes a bound vacuous.
  std::array<double, 3> eps1_bounds{};

  /// Smallest relative slack (bound / eps1 - 1) over the three bounds.
  [[nodiscard]] double min_slack() const;
  [[nodiscard]] EpsilonCertificate scaled(double factor) const;
};

/// Builds a certificate from an explicit eps. Throws Infeasible when eps is
/// not strictly feasible.
[[nodiscard]] EpsilonCertificate make_certificate(const ProblemConstants& c, const Vector4& eps);

/// Normalized construction with eps2 = 1; `margin` sizes eps3 and eps4 so
/// the second and third eps1 bounds sit (1 + margin) above the first, then
/// eps1 takes half of the tightest bound. Throws Infeasible if sigma >= 1.
[[nodiscard]] EpsilonCertificate find_epsilon(const ProblemConstants& c, double margin = 0.1);

/// Admissible (alpha, beta) induced by a certificate.
class StepsizeRegion {
 public:
  StepsizeRegion(const EpsilonCertificate& cert, const ProblemConstants& c);

  /// {1/Q, sbar eps1/et, (sbar eps2 - L eta eps1)/eb, (eps4 - eta eps1)/et}
  [[nodiscard]] const std::array<double, 4>& alpha_terms() const noexcept { return alpha_terms_; }
  [[nodiscard]] double alpha_max() const noexcept { return alpha_max_; }

  /// The beta bounds at alpha: row 1 with eps1, row 1 with eps2, row 2,
  /// row 3, row 4. Both readings of the row-1 bound are kept.
  [[nodiscard]] std::array<double, 5> beta_terms(double alpha) const;
  [[nodiscard]] double beta_max(double alpha) const;

  /// 0 < alpha < alpha_max and 0 <= beta < beta_max(alpha).
  [[nodiscard]] bool certifies(double alpha, double beta) const;

  [[nodiscard]] const EpsilonCertificate& certificate() const noexcept { return cert_; }

 private:
  EpsilonCertificate cert_;
  ProblemConstants c_;
  std::array<double, 4> alpha_terms_{};
  double alpha_max_ = 0.0;
};

/// Throws EmptyRegion when the certificate leaves no admissible alpha.
[[nodiscard]] StepsizeRegion stepsize_bounds(const EpsilonCertificate& cert,
                                             const ProblemConstants& c);

/// M(alpha, beta) = M0 + alpha M1 + beta M2 with Perron-vector certificates.
///
/// M0 = M(0, 0) is reducible with Perron root exactly 1 and Perron vector
/// (0, 0, 1, 0), which certifies nothing for alpha > 0. The region therefore
/// uses the Perron vector of M(alpha, beta) at each query point and asks for
///   alpha M1 eps + beta M2 eps < (r(alpha) - 1) eps - (M0 - I) eps,
/// i.e. M(alpha, beta) eps < r(alpha) eps, with target rate
/// r(alpha) = 1 - alpha/(c Q). c = +inf gives the plain rho < 1 test.
class PerronRegion {
 public:
  PerronRegion(const ProblemConstants& c, double rate_c);

  [[nodiscard]] const Matrix4& m0() const noexcept { return m0_; }
  [[nodiscard]] const Matrix4& m1() const noexcept { return m1_; }
  [[nodiscard]] const Matrix4& m2() const noexcept { return m2_; }
  [[nodiscard]] const PerronPair& m0_perron() const noexcept { return m0_perron_; }
  [[nodiscard]] bool m0_vector_positive() const noexcept { return m0_vector_positive_; }
  [[nodiscard]] double rate_c() const noexcept { return rate_c_; }

  [[nodiscard]] double target_rate(double alpha) const;
  [[nodiscard]] bool certifies(double alpha, double beta) const;
  /// Largest certified beta at alpha by bisection (rho is nondecreasing in beta).
  [[nodiscard]] double beta_max(double alpha) const;
  /// Supremum of certified alpha at beta = 0 within (0, 1/Q].
  [[nodiscard]] double alpha_max() const;

 private:
  ProblemConstants c_;
  double rate_c_;
  Matrix4 m0_;
  Matrix4 m1_;
  Matrix4 m2_;
  PerronPair m0_perron_;
  bool m0_vector_positive_ = false;
};

[[nodiscard]] PerronRegion perron_bounds(const ProblemConstants& c, double rate_c = 2.0);

/// Least-squares fit of log(values[t]) = a + t log(rho_hat).
struct RateFit {
  double rho_hat = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int first_round = 0;
  int last_round = 0;
  int burn_in = 0;
};

/// Fits over rounds [burn_in, first round with value <= floor). Throws
/// InsufficientTrace with fewer than `min_points` rounds in the window.
[[nodiscard]] RateFit fit_rate(std::span<const double> values, int burn_in, double floor,
                               int min_points = 2);

struct VerifyOptions {
  double slack = 1e-9;
  int burn_in = 20;
  double floor = 1e-10;
  double rate_slack = 0.02;
  /// Whether (alpha, beta) was certified; enables the rho_hat <= rho + slack check.
  bool certified = false;
};

struct ContractionReport {
  bool recursion_holds = true;
  std::optional<int> first_violation;  // round t with e(t+1) > M e(t) + slack
  int violating_component = -1;
  double worst_excess = 0.0;  // max over rounds/components of e(t+1) - M e(t)
  std::optional<RateFit> rate;
  bool rate_ok = true;

  [[nodiscard]] bool pass() const noexcept { return recursion_holds && rate_ok; }
};

/// Checks e(t+1) <= M e(t) + slack over the trace. Throws InsufficientTrace
/// for fewer than two rounds or missing optimality errors.
[[nodiscard]] ContractionReport verify_contraction(const RunTrace& trace, const ContractionMatrix& m,
                                                   const VerifyOptions& opts = {});

/// Grid export: alpha,beta,rho,certified where `certified` is region.certifies.
void write_region_csv(std::ostream& out, const ProblemConstants& c, const StepsizeRegion& region,
                      std::span<const double> alphas, std::span<const double> betas);

}  // namespace hbdn
