#include "discovars/cluster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "discovars/error.hpp"
#include "discovars/parallel.hpp"

namespace discovars::cluster {
namespace {

using Index = Eigen::Index;

void check_k(const Eigen::MatrixXd& data, int k) {
  if (data.rows() == 0 || data.cols() == 0) throw ArgumentError("clustering needs a non-empty matrix");
  if (k < 1 || k > data.rows()) {
    throw ArgumentError("k must lie in [1, " + std::to_string(data.rows()) + "], got " + std::to_string(k));
  }
  if (!data.allFinite()) throw ArgumentError("clustering input contains non-finite values");
}

double wcss_of(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centroids, const std::vector<int>& labels) {
  double total = 0.0;
  for (Index r = 0; r < data.rows(); ++r) {
    total += (data.row(r) - centroids.row(labels[static_cast<std::size_t>(r)])).squaredNorm();
  }
  return total;
}

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& data, int k, std::mt19937_64& rng) {
  const Index m = data.rows();
  Eigen::MatrixXd centers(k, data.cols());
  std::uniform_int_distribution<Index> pick(0, m - 1);
  centers.row(0) = data.row(pick(rng));
  Eigen::VectorXd d2(m);
  for (Index r = 0; r < m; ++r) d2(r) = (data.row(r) - centers.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    double total = d2.sum();
    Index chosen = m - 1;
    if (total > 0.0) {
      double target = unit(rng) * total;
      double acc = 0.0;
      for (Index r = 0; r < m; ++r) {
        acc += d2(r);
        if (acc >= target && d2(r) > 0.0) {
          chosen = r;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(c) = data.row(chosen);
    for (Index r = 0; r < m; ++r) d2(r) = std::min(d2(r), (data.row(r) - centers.row(c)).squaredNorm());
  }
  return centers;
}

KMeansResult lloyd(const Eigen::MatrixXd& data, int k, int max_iter, std::mt19937_64& rng) {
  const Index m = data.rows();
  KMeansResult res;
  res.k = k;
  res.centroids = plus_plus_seeds(data, k, rng);
  res.labels.assign(static_cast<std::size_t>(m), -1);

  auto recompute = [&] {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Index r = 0; r < m; ++r) {
      int l = res.labels[static_cast<std::size_t>(r)];
      sums.row(l) += data.row(r);
      ++counts[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) res.centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }
    return counts;
  };

  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (Index r = 0; r < m; ++r) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double dist = (data.row(r) - res.centroids.row(c)).squaredNorm();
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      if (res.labels[static_cast<std::size_t>(r)] != best) {
        res.labels[static_cast<std::size_t>(r)] = best;
        changed = true;
      }
    }
    if (!changed && it > 0) break;
    res.iterations = it + 1;
    auto counts = recompute();
    // an empty cluster takes over the point farthest from its centroid
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Index far = 0;
      double far_d = -1.0;
      for (Index r = 0; r < m; ++r) {
        int l = res.labels[static_cast<std::size_t>(r)];
        if (counts[static_cast<std::size_t>(l)] < 2) continue;
        double dist = (data.row(r) - res.centroids.row(l)).squaredNorm();
        if (dist > far_d) {
          far_d = dist;
          far = r;
        }
      }
      res.labels[static_cast<std::size_t>(far)] = c;
      counts = recompute();
    }
    res.wcss_trace.push_back(wcss_of(data, res.centroids, res.labels));
  }
  recompute();
  res.wcss = wcss_of(data, res.centroids, res.labels);
  return res;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& data, int k, int restarts, int max_iter, std::uint64_t seed) {
  check_k(data, k);
  if (restarts < 1) throw ArgumentError("restarts must be >= 1");
  if (max_iter < 1) throw ArgumentError("max_iter must be >= 1");
  std::mt19937_64 master(seed);
  std::optional<KMeansResult> best;
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(master());
    KMeansResult run = lloyd(data, k, max_iter, rng);
    if (!best || run.wcss < best->wcss) best = std::move(run);
  }
  best->seed = seed;
  return std::move(*best);
}

std::vector<ElbowPoint> elbow_curve(const Eigen::MatrixXd& data, int k_min, int k_max, int restarts,
                                    std::uint64_t seed) {
  if (k_min < 1 || k_min > k_max || k_max > data.rows()) {
    throw ArgumentError("elbow range must satisfy 1 <= k_min <= k_max <= m");
  }
  std::vector<ElbowPoint> out;
  for (int k = k_min; k <= k_max; ++k) out.push_back({k, kmeans(data, k, restarts, 300, seed).wcss});
  return out;
}

std::string_view to_string(CovarianceType type) {
  switch (type) {
    case CovarianceType::spherical: return "spherical";
    case CovarianceType::diagonal: return "diagonal";
    case CovarianceType::full: return "full";
  }
  return "unknown";
}

CovarianceType parse_covariance(std::string_view text) {
  for (auto t : kAllCovariances) {
    if (to_string(t) == text) return t;
  }
  throw ArgumentError("unknown covariance type '" + std::string(text) + "'");
}

int parameter_count(int k, int dims, CovarianceType type) {
  int cov = 0;
  switch (type) {
    case CovarianceType::spherical: cov = 1; break;
    case CovarianceType::diagonal: cov = dims; break;
    case CovarianceType::full: cov = dims * (dims + 1) / 2; break;
  }
  return (k - 1) + k * dims + k * cov;
}

double bic_value(double log_likelihood, int n_params, std::size_t n_obs) {
  return 2.0 * log_likelihood - static_cast<double>(n_params) * std::log(static_cast<double>(n_obs));
}

namespace {

struct Mixture {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;
  std::vector<Eigen::MatrixXd> covariances;
};

Mixture m_step(const Eigen::MatrixXd& data, const Eigen::MatrixXd& resp, CovarianceType type, double ridge) {
  const Index m = data.rows();
  const Index n = data.cols();
  const Index k = resp.cols();
  Mixture mix;
  Eigen::VectorXd nk = resp.colwise().sum().transpose();
  for (Index c = 0; c < k; ++c) {
    if (!(nk(c) > 1e-8)) throw NumericError("mixture component " + std::to_string(c) + " collapsed");
  }
  mix.weights = nk / static_cast<double>(m);
  mix.means = (resp.transpose() * data).array().colwise() / nk.array();
  for (Index c = 0; c < k; ++c) {
    Eigen::MatrixXd centered = data.rowwise() - mix.means.row(c);
    Eigen::MatrixXd s = (centered.array().colwise() * resp.col(c).array()).matrix().transpose() * centered / nk(c);
    Eigen::MatrixXd cov;
    switch (type) {
      case CovarianceType::full:
        cov = 0.5 * (s + s.transpose());
        cov.diagonal().array() += ridge;
        break;
      case CovarianceType::diagonal:
        cov = Eigen::MatrixXd::Zero(n, n);
        cov.diagonal() = s.diagonal().array() + ridge;
        break;
      case CovarianceType::spherical:
        cov = Eigen::MatrixXd::Identity(n, n) * (s.trace() / static_cast<double>(n) + ridge);
        break;
    }
    mix.covariances.push_back(std::move(cov));
  }
  return mix;
}

/// Per-row, per-component log(weight * density) and the total log-likelihood.
double e_step(const Eigen::MatrixXd& data, const Mixture& mix, Eigen::MatrixXd& resp) {
  const Index m = data.rows();
  const Index n = data.cols();
  const Index k = mix.weights.size();
  const double log2pi = std::log(2.0 * std::numbers::pi);
  Eigen::MatrixXd logp(m, k);
  for (Index c = 0; c < k; ++c) {
    Eigen::LLT<Eigen::MatrixXd> llt(mix.covariances[static_cast<std::size_t>(c)]);
    if (llt.info() != Eigen::Success) throw NumericError("singular covariance in component " + std::to_string(c));
    Eigen::MatrixXd l = llt.matrixL();
    double min_diag = l.diagonal().minCoeff();
    if (!(min_diag > 0.0)) throw NumericError("singular covariance in component " + std::to_string(c));
    double logdet = 2.0 * l.diagonal().array().log().sum();
    Eigen::MatrixXd centered = (data.rowwise() - mix.means.row(c)).transpose();
    Eigen::MatrixXd z = llt.matrixL().solve(centered);
    Eigen::VectorXd quad = z.colwise().squaredNorm().transpose();
    logp.col(c) = (-0.5 * (static_cast<double>(n) * log2pi + logdet + quad.array())).matrix().array() +
                  std::log(mix.weights(c));
  }
  resp.resize(m, k);
  double total = 0.0;
  for (Index r = 0; r < m; ++r) {
    double top = logp.row(r).maxCoeff();
    double lse = top + std::log((logp.row(r).array() - top).exp().sum());
    total += lse;
    resp.row(r) = (logp.row(r).array() - lse).exp();
  }
  if (!std::isfinite(total)) throw NumericError("non-finite log-likelihood");
  return total;
}

}  // namespace

GmmResult gmm_em(const Eigen::MatrixXd& data, int k, CovarianceType type, std::uint64_t seed, int max_iter,
                 double tol) {
  check_k(data, k);
  const Index m = data.rows();
  const Index n = data.cols();
  if (type == CovarianceType::full && m <= n) {
    throw ArgumentError("full covariance needs more rows than dimensions");
  }
  if (max_iter < 1) throw ArgumentError("max_iter must be >= 1");

  Eigen::RowVectorXd mean = data.colwise().mean();
  double avg_var = (data.rowwise() - mean).array().square().colwise().sum().mean() / static_cast<double>(m);
  double ridge = 1e-6 * (avg_var > 0.0 ? avg_var : 1.0);

  KMeansResult init = kmeans(data, k, 5, 300, seed);
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(m, k);
  for (Index r = 0; r < m; ++r) resp(r, init.labels[static_cast<std::size_t>(r)]) = 1.0;

  GmmResult res;
  res.k = k;
  res.covariance_type = type;
  Mixture mix = m_step(data, resp, type, ridge);
  double prev = -std::numeric_limits<double>::infinity();
  bool fresh = false;
  for (int it = 1; it <= max_iter; ++it) {
    double ll = e_step(data, mix, resp);
    res.log_likelihood_trace.push_back(ll);
    res.iterations = it;
    fresh = true;
    if (it > 1 && ll - prev < tol * (1.0 + std::abs(ll))) {
      res.converged = true;
      break;
    }
    prev = ll;
    mix = m_step(data, resp, type, ridge);
    fresh = false;
  }
  if (!fresh) res.log_likelihood_trace.push_back(e_step(data, mix, resp));

  res.log_likelihood = res.log_likelihood_trace.back();
  res.weights = mix.weights;
  res.means = mix.means;
  res.covariances = std::move(mix.covariances);
  res.n_params = parameter_count(k, static_cast<int>(n), type);
  res.bic = bic_value(res.log_likelihood, res.n_params, static_cast<std::size_t>(m));
  res.labels.resize(static_cast<std::size_t>(m));
  for (Index r = 0; r < m; ++r) {
    Index best = 0;
    resp.row(r).maxCoeff(&best);
    res.labels[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return res;
}

GmmSelection select_gmm(const Eigen::MatrixXd& data, int k_max, std::span<const CovarianceType> types,
                        std::uint64_t seed, std::size_t threads) {
  if (k_max < 1) throw ArgumentError("k_max must be >= 1");
  if (types.empty()) throw ArgumentError("at least one covariance type is required");

  struct Job {
    int k;
    CovarianceType type;
    std::optional<GmmResult> fit;
    std::string error;
  };
  std::vector<Job> jobs;
  for (auto type : types) {
    for (int k = 1; k <= k_max; ++k) jobs.push_back({k, type, std::nullopt, {}});
  }

  const double m = static_cast<double>(data.rows());
  const double dims = static_cast<double>(data.cols());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    try {
      auto fit = gmm_em(data, jobs[i].k, jobs[i].type, seed);
      // a component must hold enough mass to estimate its covariance
      double need = jobs[i].type == CovarianceType::full ? dims + 1.0 : 2.0;
      double smallest = fit.weights.minCoeff() * m;
      if (jobs[i].k > 1 && smallest < need) {
        jobs[i].error = "degenerate component (effective size " + std::to_string(smallest) + ")";
      } else {
        jobs[i].fit = std::move(fit);
      }
    } catch (const std::exception& e) {
      jobs[i].error = e.what();
    }
  });

  GmmSelection out;
  const GmmResult* best = nullptr;
  for (auto& job : jobs) {
    GmmCandidate row{job.k, job.type, std::nullopt, std::nullopt, job.error};
    if (job.fit) {
      row.bic = job.fit->bic;
      row.log_likelihood = job.fit->log_likelihood;
      if (!best || job.fit->bic > best->bic) best = &*job.fit;
    }
    out.table.push_back(std::move(row));
  }
  if (!best) throw NumericError("every mixture fit failed");
  out.best = *best;
  return out;
}

}  // namespace discovars::cluster
