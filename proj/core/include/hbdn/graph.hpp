#pragma once

// Undirected agent topologies and Metropolis-Hastings consensus weights.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace hbdn {

using Edge = std::pair<int, int>;

/// Simple undirected graph on nodes 0..n-1. Edges are stored once as (i, j)
/// with i < j, sorted lexicographically.
class Topology {
 public:
  Topology(int n, std::vector<Edge> edges);

  [[nodiscard]] int size() const noexcept { return n_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] const std::vector<int>& degrees() const noexcept { return degrees_; }
  [[nodiscard]] const std::vector<int>& neighbors(int i) const { return adjacency_.at(i); }
  [[nodiscard]] bool has_edge(int i, int j) const;
  [[nodiscard]] bool is_connected() const;

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<int> degrees_;
  std::vector<std::vector<int>> adjacency_;
};

inline constexpr int kDefaultGenerationRetries = 100;

/// Random d-regular connected graph. Deterministic for fixed (n, d, seed).
/// Throws InvalidDegree when n*d is odd or d >= n, GenerationFailure when
/// no connected instance is found within `max_retries` attempts.
[[nodiscard]] Topology gen_regular(int n, int d, std::uint64_t seed,
                                   int max_retries = kDefaultGenerationRetries);

/// G(n, p) resampled until connected.
[[nodiscard]] Topology gen_erdos_renyi(int n, double p, std::uint64_t seed,
                                       int max_retries = kDefaultGenerationRetries);

[[nodiscard]] Topology path_graph(int n);
[[nodiscard]] Topology complete_graph(int n);

/// sigma = ||W - 11^T/n||_2 and eta = ||W - I||_2.
struct SpectralQuantities {
  double sigma = 0.0;
  double eta = 0.0;
};

/// Doubly stochastic weight matrix together with its spectral constants.
struct ConsensusMatrix {
  Eigen::MatrixXd w;
  double sigma = 0.0;
  double eta = 0.0;

  [[nodiscard]] int size() const noexcept { return static_cast<int>(w.rows()); }
};

/// w_ij = 1/(1 + max(deg_i, deg_j)) on edges, residual mass on the diagonal.
/// Throws NotConnected for a disconnected topology.
[[nodiscard]] ConsensusMatrix metropolis_weights(const Topology& topo);

/// Spectral norms via a symmetric eigensolver when W is symmetric, SVD
/// otherwise. Throws InvalidArgument if W is not doubly stochastic within
/// 1e-10, NonConvergence if the eigensolver fails.
[[nodiscard]] SpectralQuantities spectral_quantities(const Eigen::MatrixXd& w);

/// Largest |row sum - 1| and |column sum - 1|.
[[nodiscard]] double stochasticity_defect(const Eigen::MatrixXd& w);

// Plain-text edge list: "n m" then m lines "i j".
void write_topology(std::ostream& out, const Topology& topo);
[[nodiscard]] Topology read_topology(std::istream& in);

// n rows of n comma-separated values, 17 significant digits.
void write_weights_csv(std::ostream& out, const Eigen::MatrixXd& w);

}  // namespace hbdn
