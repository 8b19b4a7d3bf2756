#include "discovars/report.hpp"

namespace discovars::report {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

json method_json(const linmod::SelectionMethod& method, double resolved_lambda) {
  json params = json::object();
  switch (method.kind) {
    case linmod::Method::stepwise:
      params = {{"p_enter", method.p_enter}, {"p_exit", method.p_exit}};
      break;
    case linmod::Method::forward:
      params = {{"p_enter", method.p_enter}};
      break;
    case linmod::Method::step_aic:
      break;
    case linmod::Method::lasso:
      params = {{"lambda", resolved_lambda}, {"lambda_rule", method.lasso_lambda ? "fixed" : "16/m"}};
      break;
  }
  return {{"method", linmod::to_string(method.kind)}, {"params", params}};
}

json network_json(const depnet::DependencyNetwork& network) {
  json edges = json::array();
  for (const auto& [u, v] : network.edges) edges.push_back({network.nodes[u], network.nodes[v]});
  json summary = json::array();
  for (std::size_t i = 0; i < network.nodes.size(); ++i) {
    const auto& s = network.summaries[i];
    summary.push_back({{"node", network.nodes[i]},
                       {"selected", s.selected},
                       {"rss", s.rss},
                       {"hit_iteration_cap", s.hit_iteration_cap}});
  }
  json method = method_json(network.method, network.lambda);
  method["params"]["edge_direction"] = depnet::to_string(network.direction);
  return {{"nodes", network.nodes},
          {"edges", std::move(edges)},
          {"method", method["method"]},
          {"params", method["params"]},
          {"density", network.density()},
          {"per_node_summary", std::move(summary)}};
}

json scores_json(const centrality::CentralityScores& scores, std::span<const std::string> names) {
  json by_name = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) by_name[names[i]] = scores.scores[i];
  json ranking = json::array();
  for (auto idx : scores.ranking) ranking.push_back(names[idx]);
  json params = json::object();
  switch (scores.measure) {
    case centrality::Measure::pagerank: params["damping"] = scores.params.damping; break;
    case centrality::Measure::alpha: params["attenuation"] = scores.params.attenuation; break;
    case centrality::Measure::power: params["beta"] = scores.params.beta; break;
    default: break;
  }
  return {{"measure", centrality::to_string(scores.measure)},
          {"params", std::move(params)},
          {"scores", std::move(by_name)},
          {"ranking", std::move(ranking)},
          {"fallback_used", scores.fallback_used}};
}

json kmeans_json(const cluster::KMeansResult& result) {
  return {{"k", result.k},
          {"labels", result.labels},
          {"centroids", matrix_json(result.centroids)},
          {"wcss", result.wcss},
          {"iterations", result.iterations},
          {"seed", result.seed}};
}

json gmm_json(const cluster::GmmResult& result) {
  json covs = json::array();
  for (const auto& c : result.covariances) covs.push_back(matrix_json(c));
  return {{"k", result.k},
          {"covariance_type", cluster::to_string(result.covariance_type)},
          {"weights", vector_json(result.weights)},
          {"means", matrix_json(result.means)},
          {"covariances", std::move(covs)},
          {"log_likelihood", result.log_likelihood},
          {"n_params", result.n_params},
          {"bic", result.bic},
          {"labels", result.labels},
          {"iterations", result.iterations},
          {"converged", result.converged}};
}

json gmm_table_json(std::span<const cluster::GmmCandidate> table) {
  json rows = json::array();
  for (const auto& row : table) {
    json r = {{"k", row.k}, {"covariance_type", cluster::to_string(row.covariance_type)}};
    r["bic"] = row.bic ? json(*row.bic) : json(nullptr);
    r["log_likelihood"] = row.log_likelihood ? json(*row.log_likelihood) : json(nullptr);
    if (!row.error.empty()) r["error"] = row.error;
    rows.push_back(std::move(r));
  }
  return rows;
}

json pca_json(const metrics::PcaProjection& pca) {
  return {{"coordinates", matrix_json(pca.coordinates)},
          {"explained_variance_ratio", vector_json(pca.explained_variance_ratio)},
          {"loadings", matrix_json(pca.loadings)}};
}

json load_json(const ingest::LoadResult& load) {
  json dropped = json::array();
  for (const auto& w : load.dropped_columns) dropped.push_back({{"column", w.column}, {"reason", w.reason}});
  return {{"rows", load.table.rows()},
          {"columns", load.table.cols()},
          {"dropped_columns", std::move(dropped)},
          {"dropped_rows", load.dropped_rows}};
}

}  // namespace discovars::report
