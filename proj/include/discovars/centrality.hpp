#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace discovars::centrality {

/// Simple directed graph on nodes 0..n-1. No self-loops, no duplicate edges.
struct Digraph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  Digraph() = default;
  Digraph(std::size_t node_count, std::vector<std::pair<std::size_t, std::size_t>> edge_list);

  /// A(i, j) = 1 for every edge i -> j.
  [[nodiscard]] Eigen::MatrixXd adjacency() const;
  [[nodiscard]] std::vector<std::vector<std::size_t>> out_neighbors() const;
  [[nodiscard]] Digraph relabeled(std::span<const std::size_t> new_index) const;
};

enum class Measure { alpha, authority, betweenness, closeness, degree, eigen, hub, pagerank, power };

inline constexpr Measure kAllMeasures[] = {Measure::alpha,  Measure::authority, Measure::betweenness,
                                           Measure::closeness, Measure::degree, Measure::eigen,
                                           Measure::hub,    Measure::pagerank,  Measure::power};

std::string_view to_string(Measure measure);
Measure parse_measure(std::string_view text);

struct MeasureParams {
  double damping = 0.85;      // pagerank, in (0, 1)
  double attenuation = 0.85;  // alpha, as a fraction of 1 / lambda_max
  double beta = 0.85;         // power, as a fraction of 1 / lambda_max

  void validate() const;
};

struct CentralityScores {
  Measure measure = Measure::degree;
  MeasureParams params;
  std::vector<double> scores;
  /// Node indices by descending score; equal scores keep ascending index.
  std::vector<std::size_t> ranking;
  /// Set when eigen had to fall back to the symmetrized graph A + A^T.
  bool fallback_used = false;
};

/// Spectral radius of the adjacency matrix, the maximum Perron root over the
/// strongly connected components. Zero for acyclic graphs.
double spectral_radius(const Digraph& g);

CentralityScores degree(const Digraph& g);
CentralityScores pagerank(const Digraph& g, double damping = 0.85);
/// First: hub scores (A A^T), second: authority scores (A^T A).
std::pair<CentralityScores, CentralityScores> hits(const Digraph& g);
CentralityScores eigen(const Digraph& g);
CentralityScores betweenness(const Digraph& g);
CentralityScores closeness(const Digraph& g);
CentralityScores alpha(const Digraph& g, double attenuation = 0.85);
CentralityScores power(const Digraph& g, double beta = 0.85);

CentralityScores compute(const Digraph& g, Measure measure, const MeasureParams& params = {});

std::vector<std::size_t> stable_ranking(std::span<const double> scores);

/// First n names of the ranking; throws ArgumentError unless 1 <= n <= d.
std::vector<std::string> rank_top_n(const CentralityScores& scores,
                                    std::span<const std::string> names, std::size_t n);

}  // namespace discovars::centrality
