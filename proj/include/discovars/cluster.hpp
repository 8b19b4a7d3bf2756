#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace discovars::cluster {

struct KMeansResult {
  int k = 0;
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x n
  double wcss = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  /// WCSS after each Lloyd iteration of the winning restart.
  std::vector<double> wcss_trace;
};

/// Lloyd's algorithm from k-means++ seeding; best of `restarts` runs by WCSS.
/// Rows of `data` are observations.
KMeansResult kmeans(const Eigen::MatrixXd& data, int k, int restarts = 10, int max_iter = 300,
                    std::uint64_t seed = 1);

struct ElbowPoint {
  int k = 0;
  double wcss = 0.0;
};

std::vector<ElbowPoint> elbow_curve(const Eigen::MatrixXd& data, int k_min, int k_max,
                                    int restarts = 5, std::uint64_t seed = 1);

enum class CovarianceType { spherical, diagonal, full };

std::string_view to_string(CovarianceType type);
CovarianceType parse_covariance(std::string_view text);

inline constexpr CovarianceType kAllCovariances[] = {CovarianceType::spherical, CovarianceType::diagonal,
                                                     CovarianceType::full};

struct GmmResult {
  int k = 0;
  CovarianceType covariance_type = CovarianceType::full;
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;                    // k x n
  std::vector<Eigen::MatrixXd> covariances;  // k matrices, n x n
  double log_likelihood = 0.0;
  int n_params = 0;
  double bic = 0.0;
  std::vector<int> labels;
  int iterations = 0;
  bool converged = false;
  std::vector<double> log_likelihood_trace;
};

/// Free parameters: (k - 1) + k n + k * (1 | n | n (n + 1) / 2).
int parameter_count(int k, int dims, CovarianceType type);

/// 2 log L - n_params ln(m); larger is better.
double bic_value(double log_likelihood, int n_params, std::size_t n_obs);

/// EM for a Gaussian mixture, initialized from k-means. A ridge of
/// 1e-6 * (average column variance) is added to every covariance.
GmmResult gmm_em(const Eigen::MatrixXd& data, int k, CovarianceType type, std::uint64_t seed = 1,
                 int max_iter = 500, double tol = 1e-7);

struct GmmCandidate {
  int k = 0;
  CovarianceType covariance_type = CovarianceType::full;
  std::optional<double> bic;
  std::optional<double> log_likelihood;
  std::string error;
};

struct GmmSelection {
  GmmResult best;
  std::vector<GmmCandidate> table;
};

/// Fits every (k, type) pair for k in 1..k_max and keeps the largest BIC.
/// Fits with a component too small to carry its covariance are listed with an error.
GmmSelection select_gmm(const Eigen::MatrixXd& data, int k_max = 9,
                        std::span<const CovarianceType> types = kAllCovariances, std::uint64_t seed = 1,
                        std::size_t threads = 0);

}  // namespace discovars::cluster
