#pragma once

// Binary classification datasets: synthesis, delimited text I/O, PCA
// reduction and homogeneous partitioning across agents.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace hbdn {

struct RawDataset {
  Eigen::MatrixXd features;  // m x p, one sample per row
  Eigen::VectorXd labels;    // +1 / -1

  [[nodiscard]] int samples() const noexcept { return static_cast<int>(features.rows()); }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(features.cols()); }
  [[nodiscard]] int positives() const noexcept;

  /// Throws InvalidArgument on shape mismatch, non-finite entries, m == 0 or
  /// labels outside {-1, +1}.
  void validate() const;
};

/// Gaussian features, a hidden unit direction w and labels
/// sign(u^T w + noise / separation). separation may be +inf for a noiseless,
/// linearly separable set. Redraws the noise until both classes occur and
/// throws DegenerateLabels when the retry budget runs out.
[[nodiscard]] RawDataset synthesize(int m, int p, std::uint64_t seed, double separation,
                                    int max_retries = 100);

struct DelimitedOptions {
  int label_column = -1;  // negative counts from the end
  std::string positive_label = "1";
};

/// Comma or whitespace separated numbers, one sample per line. Blank lines
/// and lines starting with '#' are skipped. The label column matches
/// positive_label numerically when both parse as numbers, textually otherwise.
/// Throws ParseError naming the line, or InconsistentWidth.
[[nodiscard]] RawDataset load_delimited(std::istream& in, const DelimitedOptions& opts = {});
[[nodiscard]] RawDataset load_delimited(const std::filesystem::path& path,
                                        const DelimitedOptions& opts = {});

/// Features then the label (1 or -1), comma separated, 17 significant digits.
void save_delimited(std::ostream& out, const RawDataset& ds);
void save_delimited(const std::filesystem::path& path, const RawDataset& ds);

struct PcaModel {
  Eigen::VectorXd mean;                // length p_raw
  Eigen::VectorXd scale;               // per-feature divisor, ones unless standardized
  Eigen::MatrixXd components;          // p_raw x k, orthonormal columns
  Eigen::VectorXd explained_variance;  // length k, nonincreasing

  [[nodiscard]] Eigen::MatrixXd transform(const Eigen::MatrixXd& features) const;
  [[nodiscard]] Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& reduced) const;
};

/// Covariance PCA of the mean-centered features. Each component has its
/// largest-magnitude entry positive. Throws InvalidArgument unless
/// 1 <= k <= min(m, p_raw), and RankDeficient when k exceeds the numerical rank.
[[nodiscard]] std::pair<PcaModel, RawDataset> pca_fit_transform(const RawDataset& ds, int k,
                                                                 bool standardize = false);

struct Partition {
  std::vector<int> assignment;  // agent of each sample
  std::vector<int> counts;      // samples per agent

  [[nodiscard]] int agents() const noexcept { return static_cast<int>(counts.size()); }
  /// Sample indices owned by `agent`, ascending.
  [[nodiscard]] std::vector<int> members(int agent) const;
};

/// Seeded uniform permutation followed by round-robin assignment.
/// Throws InvalidArgument unless 1 <= n <= m.
[[nodiscard]] Partition shuffle_partition(int m, int n, std::uint64_t seed);

/// The per-agent local datasets, samples in ascending index order.
[[nodiscard]] std::vector<RawDataset> split(const RawDataset& ds, const Partition& part);

}  // namespace hbdn
