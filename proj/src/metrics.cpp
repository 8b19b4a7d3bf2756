#include "discovars/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "discovars/error.hpp"

namespace discovars::metrics {

Partition Partition::from_labels(std::span<const int> raw) {
  Partition p;
  std::map<int, int> ids;
  p.labels.reserve(raw.size());
  for (int l : raw) {
    auto [it, inserted] = ids.try_emplace(l, static_cast<int>(ids.size()));
    p.labels.push_back(it->second);
  }
  p.k = static_cast<int>(ids.size());
  return p;
}

void Partition::validate() const {
  std::vector<bool> seen(static_cast<std::size_t>(std::max(k, 0)), false);
  for (int l : labels) {
    if (l < 0 || l >= k) throw ArgumentError("partition label " + std::to_string(l) + " outside [0, k)");
    seen[static_cast<std::size_t>(l)] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ArgumentError("partition has an empty cluster");
  }
}

double davies_bouldin(const Eigen::MatrixXd& data, const Partition& partition) {
  partition.validate();
  if (partition.labels.size() != static_cast<std::size_t>(data.rows())) {
    throw ArgumentError("partition length does not match row count");
  }
  const int k = partition.k;
  if (k < 2) throw ArgumentError("Davies-Bouldin index needs at least 2 clusters");

  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(k, data.cols());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    int l = partition.labels[static_cast<std::size_t>(r)];
    centroids.row(l) += data.row(r);
    counts(l) += 1.0;
  }
  centroids.array().colwise() /= counts.array();

  Eigen::VectorXd scatter = Eigen::VectorXd::Zero(k);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    int l = partition.labels[static_cast<std::size_t>(r)];
    scatter(l) += (data.row(r) - centroids.row(l)).norm();
  }
  scatter.array() /= counts.array();

  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      double sep = (centroids.row(i) - centroids.row(j)).norm();
      if (sep == 0.0) {
        throw NumericError("clusters " + std::to_string(std::min(i, j)) + " and " +
                           std::to_string(std::max(i, j)) + " have coincident centroids");
      }
      worst = std::max(worst, (scatter(i) + scatter(j)) / sep);
    }
    total += worst;
  }
  return total / k;
}

double adjusted_rand(const Partition& a, const Partition& b) {
  if (a.labels.size() != b.labels.size()) throw ArgumentError("partitions differ in length");
  a.validate();
  b.validate();
  const auto m = a.labels.size();
  auto pairs = [](double n) { return n * (n - 1.0) / 2.0; };

  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(a.k, b.k);
  for (std::size_t r = 0; r < m; ++r) table(a.labels[r], b.labels[r]) += 1.0;

  double index = table.unaryExpr(pairs).sum();
  double sum_a = table.rowwise().sum().unaryExpr(pairs).sum();
  double sum_b = table.colwise().sum().unaryExpr(pairs).sum();
  double total = pairs(static_cast<double>(m));
  if (total == 0.0) return 1.0;
  double expected = sum_a * sum_b / total;
  double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

PcaProjection pca_project(const Eigen::MatrixXd& data, int dims) {
  const Eigen::Index m = data.rows();
  const Eigen::Index d = data.cols();
  if (d < 2) throw ArgumentError("PCA needs at least 2 columns");
  if (dims < 1 || dims > d) throw ArgumentError("PCA dims must lie in [1, d]");
  if (m < 2) throw ArgumentError("PCA needs at least 2 rows");

  Eigen::MatrixXd z = data.rowwise() - data.colwise().mean();
  for (Eigen::Index j = 0; j < d; ++j) {
    double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(m));
    if (!(sd > 0.0)) throw NumericError("PCA column " + std::to_string(j) + " is constant");
    z.col(j) /= sd;
  }
  Eigen::MatrixXd corr = z.transpose() * z / static_cast<double>(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.info() != Eigen::Success) throw NumericError("PCA eigendecomposition failed");

  PcaProjection out;
  out.loadings.resize(d, dims);
  out.explained_variance_ratio.resize(dims);
  const double trace = eig.eigenvalues().sum();
  for (int c = 0; c < dims; ++c) {
    Eigen::Index src = d - 1 - c;  // eigenvalues ascend
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0.0) v = -v;
    out.loadings.col(c) = v;
    out.explained_variance_ratio(c) = std::clamp(eig.eigenvalues()(src) / trace, 0.0, 1.0);
  }
  out.coordinates = z * out.loadings;
  return out;
}

}  // namespace discovars::metrics
