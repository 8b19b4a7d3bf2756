#include "discovars/pipeline.hpp"

#include <chrono>

#include "discovars/cluster.hpp"
#include "discovars/error.hpp"
#include "discovars/metrics.hpp"
#include "discovars/report.hpp"

namespace discovars::pipeline {

using nlohmann::json;

std::string_view to_string(ClusterAlgo algo) {
  switch (algo) {
    case ClusterAlgo::none: return "none";
    case ClusterAlgo::kmeans: return "kmeans";
    case ClusterAlgo::gmm: return "gmm";
  }
  return "unknown";
}

ClusterAlgo parse_cluster_algo(std::string_view text) {
  if (text == "none") return ClusterAlgo::none;
  if (text == "kmeans") return ClusterAlgo::kmeans;
  if (text == "gmm") return ClusterAlgo::gmm;
  throw ArgumentError("unknown clustering algorithm '" + std::string(text) + "'");
}

json run_clustering(const DataTable& table, const ClusterRequest& request) {
  if (request.variables.empty()) throw ArgumentError("no variables to cluster");
  if (request.algo == ClusterAlgo::none) throw ArgumentError("clustering algorithm 'none' requested");
  DataTable subset = table.select(request.variables);
  Eigen::MatrixXd data = request.standardize ? ingest::standardize(subset).first.values : subset.values;

  json out = {{"algo", to_string(request.algo)},
              {"variables", request.variables},
              {"standardized", request.standardize},
              {"seed", request.seed}};
  std::vector<int> labels;
  if (request.algo == ClusterAlgo::kmeans) {
    auto result = cluster::kmeans(data, request.k, request.restarts, 300, request.seed);
    labels = result.labels;
    out["result"] = report::kmeans_json(result);
    int k_hi = std::min<int>(request.elbow_max, static_cast<int>(data.rows()));
    json elbow = json::array();
    for (const auto& p : cluster::elbow_curve(data, 1, k_hi, 5, request.seed)) {
      elbow.push_back({{"k", p.k}, {"wcss", p.wcss}});
    }
    out["elbow"] = std::move(elbow);
  } else {
    auto sel = cluster::select_gmm(data, request.k_max, cluster::kAllCovariances, request.seed, request.threads);
    labels = sel.best.labels;
    out["result"] = report::gmm_json(sel.best);
    out["bic_table"] = report::gmm_table_json(sel.table);
  }

  auto partition = metrics::Partition::from_labels(labels);
  out["dbi"] = nullptr;
  if (partition.k >= 2) {
    try {
      out["dbi"] = metrics::davies_bouldin(data, partition);
    } catch (const NumericError&) {
    }
  }
  out["pca"] = data.cols() >= 2 ? report::pca_json(metrics::pca_project(data, 2)) : json(nullptr);
  return out;
}

DataTable prepare_returns(const ingest::CsvDocument& prices, const ReturnsOptions& options) {
  ingest::require_ascending_dates(prices, options.date_column);
  ingest::CsvDocument without_date;
  std::size_t skip = 0;
  for (std::size_t j = 0; j < prices.header.size(); ++j) {
    if (prices.header[j] == options.date_column) skip = j;
    else without_date.header.push_back(prices.header[j]);
  }
  for (const auto& row : prices.rows) {
    std::vector<std::string> r;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j != skip) r.push_back(row[j]);
    }
    without_date.rows.push_back(std::move(r));
  }
  auto load = ingest::load_csv(without_date);
  if (load.dropped_rows > 0) {
    throw DataError(std::to_string(load.dropped_rows) + " price rows have missing values");
  }
  return ingest::compute_returns(load.table, options.lags, options.denominator);
}

void PipelineConfig::validate() const {
  method.validate();
  measure_params.validate();
  if (top_n < 1) throw ArgumentError("top_n must be >= 1");
  if (cluster == ClusterAlgo::kmeans && k < 1) throw ArgumentError("k must be >= 1");
  if (cluster == ClusterAlgo::gmm && k_max < 1) throw ArgumentError("k_max must be >= 1");
  if (restarts < 1) throw ArgumentError("restarts must be >= 1");
  if (returns && returns->lags < 0) throw ArgumentError("lags must be >= 0");
}

json run_pipeline(const PipelineConfig& config) {
  config.validate();
  using clock = std::chrono::steady_clock;
  json timings = json::object();
  auto stage = [&](const char* name, auto&& fn) {
    auto t0 = clock::now();
    auto result = fn();
    timings[name] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    return result;
  };

  json report = {{"schema", report::kSchemaVersion}};
  DataTable table = stage("load", [&] {
    std::string text = ingest::read_file(config.input);
    json input = {{"path", config.input.string()}};
    DataTable t;
    if (config.returns) {
      auto doc = ingest::parse_csv(text, config.header);
      t = prepare_returns(doc, *config.returns);
      input["returns"] = {{"date_column", config.returns->date_column},
                          {"lags", config.returns->lags},
                          {"denominator", config.returns->denominator == ingest::ReturnDenominator::current
                                              ? "current"
                                              : "previous"}};
      input["rows"] = t.rows();
      input["columns"] = t.cols();
    } else {
      auto load = ingest::load_csv(text, config.header);
      input.update(report::load_json(load));
      t = std::move(load.table);
    }
    auto constant = ingest::drop_constant_columns(t);
    input["constant_columns"] = constant.dropped;
    report["input"] = std::move(input);
    return std::move(constant.table);
  });

  if (table.cols() < 3) throw DataError("network construction needs at least 3 columns");
  if (config.top_n > table.cols()) {
    throw ArgumentError("top_n " + std::to_string(config.top_n) + " exceeds the column count " +
                        std::to_string(table.cols()));
  }

  auto network = stage("network", [&] {
    return depnet::build_network(table, config.method, {config.direction, config.threads});
  });
  report["network"] = report::network_json(network);

  auto scores = stage("centrality", [&] {
    return centrality::compute(network.graph(), config.measure, config.measure_params);
  });
  report["centrality"] = report::scores_json(scores, network.nodes);

  auto top = centrality::rank_top_n(scores, network.nodes, config.top_n);
  report["top_n"] = {{"n", config.top_n}, {"names", top}};

  if (config.cluster == ClusterAlgo::none) {
    report["clustering"] = nullptr;
  } else {
    ClusterRequest req;
    req.variables = top;
    req.algo = config.cluster;
    req.k = config.k;
    req.k_max = config.k_max;
    req.restarts = config.restarts;
    req.seed = config.seed;
    req.standardize = config.standardize_clusters;
    req.threads = config.threads;
    report["clustering"] = stage("clustering", [&] { return run_clustering(table, req); });
  }
  if (config.timings) report["timings_ms"] = std::move(timings);
  return report;
}

}  // namespace discovars::pipeline
