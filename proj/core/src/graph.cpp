#include "hbdn/graph.hpp"

#include "hbdn/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>

namespace hbdn {

namespace {

std::mt19937_64 attempt_engine(std::uint64_t seed, int attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(attempt)};
  return std::mt19937_64(seq);
}

// One pass of stub pairing. Stubs that would form a self-loop or a repeated
// edge are returned to the pool and re-shuffled; the pass fails only when no
// admissible pair remains among the leftover stubs.
std::optional<std::set<Edge>> try_pair_stubs(int n, int d, std::mt19937_64& rng) {
  std::set<Edge> edges;
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * d);
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < n; ++i) stubs.push_back(i);
  }

  while (!stubs.empty()) {
    std::map<int, int> leftover;
    std::shuffle(stubs.begin(), stubs.end(), rng);
    for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
      int a = stubs[k];
      int b = stubs[k + 1];
      if (a > b) std::swap(a, b);
      if (a != b && !edges.contains({a, b})) {
        edges.insert({a, b});
      } else {
        ++leftover[a];
        ++leftover[b];
      }
    }

    bool admissible = leftover.empty();
    for (auto it = leftover.begin(); it != leftover.end() && !admissible; ++it) {
      for (auto jt = std::next(it); jt != leftover.end(); ++jt) {
        if (!edges.contains({it->first, jt->first})) {
          admissible = true;
          break;
        }
      }
    }
    if (!admissible) return std::nullopt;

    stubs.clear();
    for (const auto& [node, count] : leftover) {
      for (int c = 0; c < count; ++c) stubs.push_back(node);
    }
  }
  return edges;
}

std::vector<Edge> complement_edges(int n, const std::set<Edge>& edges) {
  std::vector<Edge> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!edges.contains({i, j})) out.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace

Topology::Topology(int n, std::vector<Edge> edges) : n_(n), degrees_(n, 0), adjacency_(n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "topology needs at least one node");
  for (auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw Error(ErrorKind::InvalidArgument, "edge endpoint out of range");
    }
    if (i == j) throw Error(ErrorKind::InvalidArgument, "self-loop in edge list");
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw Error(ErrorKind::InvalidArgument, "duplicate edge in edge list");
  }
  edges_ = std::move(edges);
  for (const auto& [i, j] : edges_) {
    ++degrees_[i];
    ++degrees_[j];
    adjacency_[i].push_back(j);
    adjacency_[j].push_back(i);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

bool Topology::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

bool Topology::is_connected() const {
  std::vector<char> seen(n_, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adjacency_[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n_;
}

Topology gen_regular(int n, int d, std::uint64_t seed, int max_retries) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "regular graph needs n >= 2");
  if (d < 1 || d >= n || (static_cast<long long>(n) * d) % 2 != 0) {
    throw Error(ErrorKind::InvalidDegree,
                "no simple " + std::to_string(d) + "-regular graph on " + std::to_string(n) +
                    " nodes");
  }
  // Dense targets are built as the complement of a sparse regular graph;
  // stub pairing rarely succeeds when d approaches n.
  const bool via_complement = d > (n - 1) / 2;
  const int pair_degree = via_complement ? n - 1 - d : d;

  for (int attempt = 0; attempt < max_retries; ++attempt) {
    auto rng = attempt_engine(seed, attempt);
    std::optional<std::set<Edge>> paired =
        pair_degree == 0 ? std::set<Edge>{} : try_pair_stubs(n, pair_degree, rng);
    if (!paired) continue;
    std::vector<Edge> edges = via_complement ? complement_edges(n, *paired)
                                             : std::vector<Edge>(paired->begin(), paired->end());
    Topology topo(n, std::move(edges));
    if (topo.is_connected()) return topo;
  }
  throw Error(ErrorKind::GenerationFailure,
              "no connected " + std::to_string(d) + "-regular graph after " +
                  std::to_string(max_retries) + " attempts");
}

Topology gen_erdos_renyi(int n, double p, std::uint64_t seed, int max_retries) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "Erdos-Renyi graph needs n >= 2");
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "edge probability must lie in (0, 1]");
  }
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    auto rng = attempt_engine(seed, attempt);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (unit(rng) < p) edges.emplace_back(i, j);
      }
    }
    Topology topo(n, std::move(edges));
    if (topo.is_connected()) return topo;
  }
  std::ostringstream msg;
  msg << "G(" << n << ", " << p << ") not connected after " << max_retries
      << " attempts; p is likely too small";
  throw Error(ErrorKind::GenerationFailure, msg.str());
}

Topology path_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Topology(n, std::move(edges));
}

Topology complete_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  }
  return Topology(n, std::move(edges));
}

double stochasticity_defect(const Eigen::MatrixXd& w) {
  const double rows = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double cols = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(rows, cols);
}

SpectralQuantities spectral_quantities(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols() || w.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "weight matrix must be square and nonempty");
  }
  if (stochasticity_defect(w) > 1e-10) {
    throw Error(ErrorKind::InvalidArgument, "weight matrix is not doubly stochastic");
  }
  const auto n = w.rows();
  const Eigen::MatrixXd averaged = w - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd lazy = w - Eigen::MatrixXd::Identity(n, n);

  const bool symmetric = (w - w.transpose()).cwiseAbs().maxCoeff() <= 1e-14;
  auto norm2 = [symmetric](const Eigen::MatrixXd& a) {
    if (symmetric) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::NonConvergence, "symmetric eigensolver did not converge");
      }
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    return svd.singularValues()(0);
  };
  return {norm2(averaged), norm2(lazy)};
}

ConsensusMatrix metropolis_weights(const Topology& topo) {
  if (!topo.is_connected()) {
    throw Error(ErrorKind::NotConnected, "Metropolis weights need a connected topology");
  }
  const int n = topo.size();
  const auto& deg = topo.degrees();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : topo.edges()) {
    const double wij = 1.0 / (1.0 + static_cast<double>(std::max(deg[i], deg[j])));
    w(i, j) = wij;
    w(j, i) = wij;
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j : topo.neighbors(i)) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  const auto sq = spectral_quantities(w);
  return {std::move(w), sq.sigma, sq.eta};
}

void write_topology(std::ostream& out, const Topology& topo) {
  out << topo.size() << ' ' << topo.edges().size() << '\n';
  for (const auto& [i, j] : topo.edges()) out << i << ' ' << j << '\n';
}

Topology read_topology(std::istream& in) {
  long long n = 0;
  long long m = 0;
  if (!(in >> n >> m) || n < 1 || m < 0) {
    throw Error(ErrorKind::ParseError, "topology header must be \"n m\"");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long k = 0; k < m; ++k) {
    int i = 0;
    int j = 0;
    if (!(in >> i >> j)) {
      throw Error(ErrorKind::ParseError, "edge line " + std::to_string(k + 2) + " malformed");
    }
    edges.emplace_back(i, j);
  }
  return Topology(static_cast<int>(n), std::move(edges));
}

void write_weights_csv(std::ostream& out, const Eigen::MatrixXd& w) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (j) out << ',';
      out << w(i, j);
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace hbdn
