#include "hbdn/data.hpp"

#include "hbdn/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string_view>

namespace hbdn {

namespace {

std::mt19937_64 attempt_engine(std::uint64_t seed, int attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(attempt)};
  return std::mt19937_64(seq);
}

std::optional<double> parse_double(std::string_view tok) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  const auto is_sep = [](char ch) {
    return ch == ',' || ch == ' ' || ch == '\t' || ch == '\r';
  };
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j])) ++j;
    out.push_back(line.substr(i, j - i));
    // Consume trailing blanks and at most one comma.
    while (j < line.size() && (line[j] == ' ' || line[j] == '\t' || line[j] == '\r')) ++j;
    if (j < line.size() && line[j] == ',') ++j;
    i = j;
  }
  return out;
}

}  // namespace

int RawDataset::positives() const noexcept {
  return static_cast<int>((labels.array() > 0.0).count());
}

void RawDataset::validate() const {
  if (features.rows() == 0) throw Error(ErrorKind::InvalidArgument, "dataset has no samples");
  if (labels.size() != features.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "labels and features disagree on sample count");
  }
  if (!features.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite feature entry");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1.0 && labels(i) != -1.0) {
      throw Error(ErrorKind::InvalidArgument,
                  "label at row " + std::to_string(i) + " is not +1 or -1");
    }
  }
}

RawDataset synthesize(int m, int p, std::uint64_t seed, double separation, int max_retries) {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "need at least one feature");
  if (!(separation > 0.0)) throw Error(ErrorKind::InvalidArgument, "separation must be positive");

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    auto rng = attempt_engine(seed, attempt);
    RawDataset ds;
    ds.features.resize(m, p);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < p; ++j) ds.features(i, j) = normal(rng);
    }
    Eigen::VectorXd w(p);
    for (int j = 0; j < p; ++j) w(j) = normal(rng);
    w.normalize();

    const Eigen::VectorXd margin = ds.features * w;
    ds.labels.resize(m);
    const bool noiseless = std::isinf(separation);
    for (int i = 0; i < m; ++i) {
      const double noise = noiseless ? 0.0 : normal(rng) / separation;
      ds.labels(i) = margin(i) + noise >= 0.0 ? 1.0 : -1.0;
    }
    const int pos = ds.positives();
    if (pos > 0 && pos < m) return ds;
  }
  throw Error(ErrorKind::DegenerateLabels,
              "only one class present after " + std::to_string(max_retries) + " retries");
}

RawDataset load_delimited(std::istream& in, const DelimitedOptions& opts) {
  const auto positive_numeric = parse_double(opts.positive_label);
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::size_t width = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = tokenize(line);
    if (tokens.empty() || tokens.front().starts_with('#')) continue;
    if (width == 0) {
      width = tokens.size();
      if (width < 2) {
        throw Error(ErrorKind::ParseError,
                    "line " + std::to_string(line_no) + ": need features and a label");
      }
    } else if (tokens.size() != width) {
      throw Error(ErrorKind::InconsistentWidth,
                  "line " + std::to_string(line_no) + ": " + std::to_string(tokens.size()) +
                      " columns, expected " + std::to_string(width));
    }
    const long col = opts.label_column < 0 ? static_cast<long>(width) + opts.label_column
                                           : opts.label_column;
    if (col < 0 || col >= static_cast<long>(width)) {
      throw Error(ErrorKind::InvalidArgument, "label column out of range");
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t k = 0; k < width; ++k) {
      const auto tok = tokens[k];
      const auto value = parse_double(tok);
      if (static_cast<long>(k) == col) {
        bool positive = false;
        if (value && positive_numeric) {
          positive = *value == *positive_numeric;
        } else {
          positive = tok == opts.positive_label;
        }
        labels.push_back(positive ? 1.0 : -1.0);
        continue;
      }
      if (!value || !std::isfinite(*value)) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) +
                                               ": cannot parse '" + std::string(tok) + "'");
      }
      row.push_back(*value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::ParseError, "no data rows");

  RawDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
  ds.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j + 1 < width; ++j) {
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    ds.labels(static_cast<Eigen::Index>(i)) = labels[i];
  }
  return ds;
}

RawDataset load_delimited(const std::filesystem::path& path, const DelimitedOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return load_delimited(in, opts);
}

void save_delimited(std::ostream& out, const RawDataset& ds) {
  ds.validate();
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (int i = 0; i < ds.samples(); ++i) {
    for (int j = 0; j < ds.dim(); ++j) out << ds.features(i, j) << ',';
    out << (ds.labels(i) > 0.0 ? 1 : -1) << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

void save_delimited(const std::filesystem::path& path, const RawDataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  save_delimited(out, ds);
}

Eigen::MatrixXd PcaModel::transform(const Eigen::MatrixXd& features) const {
  if (features.cols() != mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "feature width differs from fitted model");
  }
  const Eigen::MatrixXd centered =
      (features.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
  return centered * components;
}

Eigen::MatrixXd PcaModel::inverse_transform(const Eigen::MatrixXd& reduced) const {
  if (reduced.cols() != components.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "reduced width differs from component count");
  }
  const Eigen::MatrixXd back = reduced * components.transpose();
  return (back.array().rowwise() * scale.transpose().array()).matrix().rowwise() +
         mean.transpose();
}

std::pair<PcaModel, RawDataset> pca_fit_transform(const RawDataset& ds, int k, bool standardize) {
  ds.validate();
  const int m = ds.samples();
  const int p = ds.dim();
  if (k < 1 || k > std::min(m, p)) {
    throw Error(ErrorKind::InvalidArgument, "need 1 <= k <= min(m, p)");
  }
  PcaModel model;
  model.mean = ds.features.colwise().mean().transpose();
  Eigen::MatrixXd centered = ds.features.rowwise() - model.mean.transpose();
  const double denom = m > 1 ? static_cast<double>(m - 1) : 1.0;
  model.scale = Eigen::VectorXd::Ones(p);
  if (standardize) {
    for (int j = 0; j < p; ++j) {
      const double sd = std::sqrt(centered.col(j).squaredNorm() / denom);
      if (sd > 0.0) model.scale(j) = sd;
    }
    centered = centered.array().rowwise() / model.scale.transpose().array();
  }
  const Eigen::MatrixXd cov = centered.transpose() * centered / denom;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::NonConvergence, "covariance eigendecomposition failed");
  }
  // Eigen returns ascending eigenvalues; take the top k from the end.
  const Eigen::VectorXd& values = es.eigenvalues();
  const double top = std::max(values(p - 1), 0.0);
  const double cutoff = 1e-12 * std::max(top, std::numeric_limits<double>::min());
  model.components.resize(p, k);
  model.explained_variance.resize(k);
  for (int c = 0; c < k; ++c) {
    const int idx = p - 1 - c;
    if (!(values(idx) > cutoff)) {
      throw Error(ErrorKind::RankDeficient,
                  "k = " + std::to_string(k) + " exceeds numerical rank " + std::to_string(c));
    }
    Eigen::VectorXd v = es.eigenvectors().col(idx);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    model.components.col(c) = v;
    model.explained_variance(c) = values(idx);
  }
  RawDataset reduced;
  reduced.features = centered * model.components;
  reduced.labels = ds.labels;
  return {std::move(model), std::move(reduced)};
}

std::vector<int> Partition::members(int agent) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == agent) out.push_back(static_cast<int>(i));
  }
  return out;
}

Partition shuffle_partition(int m, int n, std::uint64_t seed) {
  if (n < 1 || n > m) throw Error(ErrorKind::InvalidArgument, "need 1 <= n <= m");
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  auto rng = attempt_engine(seed, 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Partition part;
  part.assignment.assign(static_cast<std::size_t>(m), 0);
  part.counts.assign(static_cast<std::size_t>(n), 0);
  for (int k = 0; k < m; ++k) {
    const int agent = k % n;
    part.assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = agent;
    ++part.counts[static_cast<std::size_t>(agent)];
  }
  return part;
}

std::vector<RawDataset> split(const RawDataset& ds, const Partition& part) {
  if (static_cast<int>(part.assignment.size()) != ds.samples()) {
    throw Error(ErrorKind::DimensionMismatch, "partition size differs from sample count");
  }
  std::vector<RawDataset> out(static_cast<std::size_t>(part.agents()));
  for (int a = 0; a < part.agents(); ++a) {
    const auto idx = part.members(a);
    auto& local = out[static_cast<std::size_t>(a)];
    local.features.resize(static_cast<Eigen::Index>(idx.size()), ds.dim());
    local.labels.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      local.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(idx[r]);
      local.labels(static_cast<Eigen::Index>(r)) = ds.labels(idx[r]);
    }
  }
  return out;
}

}  // namespace hbdn
