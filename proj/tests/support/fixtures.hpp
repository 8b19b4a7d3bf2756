#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "discovars/centrality.hpp"
#include "discovars/ingest.hpp"

namespace fixture {

inline Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

struct RegressionCase {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> names;
};

/// Correlated predictors, a sparse true signal of mixed strength, and noise.
inline RegressionCase regression(std::uint64_t seed, int d, int n) {
  std::mt19937_64 rng(seed);
  RegressionCase c;
  Eigen::MatrixXd base = gaussian(rng, n, d);
  Eigen::MatrixXd mix = Eigen::MatrixXd::Identity(d, d) + 0.3 * gaussian(rng, d, d);
  c.x = base * mix;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; ++j) {
    if (u(rng) < 0.5) beta(j) = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.05 + 0.4 * u(rng));
  }
  c.y = c.x * beta + gaussian(rng, n, 1).col(0);
  for (int j = 0; j < d; ++j) c.names.push_back("x" + std::to_string(j));
  return c;
}

inline discovars::centrality::Digraph random_digraph(std::mt19937_64& rng, std::size_t max_nodes) {
  std::uniform_int_distribution<std::size_t> size(1, max_nodes);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = size(rng);
  const double p = 0.1 + 0.8 * u(rng);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && u(rng) < p) edges.emplace_back(i, j);
  return {n, edges};
}

/// Isotropic blobs around well-separated centres; returns data and true labels.
inline std::pair<Eigen::MatrixXd, std::vector<int>> blobs(std::uint64_t seed, int k, int per, int dims,
                                                          double spread = 0.3, double gap = 10.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd data(k * per, dims);
  std::vector<int> labels;
  for (int c = 0; c < k; ++c) {
    Eigen::RowVectorXd centre = Eigen::RowVectorXd::Zero(dims);
    centre(c % dims) = gap * (1 + c / dims);
    for (int i = 0; i < per; ++i) {
      for (int j = 0; j < dims; ++j) data(c * per + i, j) = centre(j) + spread * z(rng);
      labels.push_back(c);
    }
  }
  return {data, labels};
}

/// Table with a chain of linear dependencies x0 -> x1 -> ... plus noise columns.
inline discovars::DataTable dependent_table(std::uint64_t seed, int d, int m) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd v = gaussian(rng, m, d);
  for (int j = 1; j < d; j += 2) v.col(j) += 0.8 * v.col(j - 1);
  std::vector<std::string> names;
  for (int j = 0; j < d; ++j) names.push_back("v" + std::to_string(j));
  return {names, v};
}

}  // namespace fixture
