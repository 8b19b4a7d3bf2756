#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace discovars::metrics {

/// Cluster assignment with labels densely covering [0, k).
struct Partition {
  std::vector<int> labels;
  int k = 0;

  /// Relabels arbitrary integer labels to dense ids in order of first appearance.
  static Partition from_labels(std::span<const int> raw);
  void validate() const;
};

/// Davies-Bouldin index with Euclidean distances; lower is better.
double davies_bouldin(const Eigen::MatrixXd& data, const Partition& partition);

/// Adjusted Rand index; 1 for identical partitions.
double adjusted_rand(const Partition& a, const Partition& b);

struct PcaProjection {
  Eigen::MatrixXd coordinates;  // m x dims
  Eigen::MatrixXd loadings;     // d x dims, unit columns
  Eigen::VectorXd explained_variance_ratio;
};

/// Principal components of the correlation matrix (columns standardized with
/// population sd). Each component's largest-magnitude loading is positive.
PcaProjection pca_project(const Eigen::MatrixXd& data, int dims = 2);

}  // namespace discovars::metrics
