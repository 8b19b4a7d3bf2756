#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "discovars/centrality.hpp"
#include "discovars/depnet.hpp"
#include "discovars/ingest.hpp"
#include "discovars/linmod.hpp"

namespace discovars::pipeline {

enum class ClusterAlgo { none, kmeans, gmm };

std::string_view to_string(ClusterAlgo algo);
ClusterAlgo parse_cluster_algo(std::string_view text);

struct ClusterRequest {
  std::vector<std::string> variables;
  ClusterAlgo algo = ClusterAlgo::kmeans;
  int k = 3;
  int k_max = 9;
  int restarts = 10;
  int elbow_max = 10;
  std::uint64_t seed = 1;
  /// Cluster on z-scored columns rather than raw values.
  bool standardize = true;
  std::size_t threads = 0;
};

/// Clusters the named columns and attaches DBI, the 2-D PCA projection and
/// the elbow curve (k-means) or BIC table (mixtures).
nlohmann::json run_clustering(const DataTable& table, const ClusterRequest& request);

struct ReturnsOptions {
  std::string date_column;
  int lags = 2;
  ingest::ReturnDenominator denominator = ingest::ReturnDenominator::current;
};

/// Price document -> return table; the date column must be strictly ascending.
DataTable prepare_returns(const ingest::CsvDocument& prices, const ReturnsOptions& options);

struct PipelineConfig {
  std::filesystem::path input;
  bool header = true;
  std::optional<ReturnsOptions> returns;
  linmod::SelectionMethod method;
  centrality::Measure measure = centrality::Measure::alpha;
  centrality::MeasureParams measure_params;
  std::size_t top_n = 5;
  ClusterAlgo cluster = ClusterAlgo::none;
  int k = 3;
  int k_max = 9;
  int restarts = 10;
  std::uint64_t seed = 1;
  bool standardize_clusters = true;
  depnet::EdgeDirection direction = depnet::EdgeDirection::child_to_parent;
  bool timings = false;
  std::size_t threads = 0;

  void validate() const;
};

/// Load -> network -> centrality -> Top-n -> optional clustering, as one
/// JSON report (schema 1). Timings are only included when requested so that
/// reports are byte-reproducible by default.
nlohmann::json run_pipeline(const PipelineConfig& config);

}  // namespace discovars::pipeline
