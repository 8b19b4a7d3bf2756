#pragma once

#include <span>
#include <string>

#include <json.hpp>

#include "discovars/centrality.hpp"
#include "discovars/cluster.hpp"
#include "discovars/depnet.hpp"
#include "discovars/ingest.hpp"
#include "discovars/metrics.hpp"

namespace discovars::report {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

json method_json(const linmod::SelectionMethod& method, double resolved_lambda);
/// {nodes, edges: [[src, dst]], method, params, per_node_summary}
json network_json(const depnet::DependencyNetwork& network);
/// {measure, params, scores: {name: value}, ranking: [names], fallback_used}
json scores_json(const centrality::CentralityScores& scores, std::span<const std::string> names);
json kmeans_json(const cluster::KMeansResult& result);
json gmm_json(const cluster::GmmResult& result);
json gmm_table_json(std::span<const cluster::GmmCandidate> table);
json pca_json(const metrics::PcaProjection& pca);
json load_json(const ingest::LoadResult& load);

json matrix_json(const Eigen::MatrixXd& m);

}  // namespace discovars::report
