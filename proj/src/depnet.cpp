#include "discovars/depnet.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>

#include "discovars/error.hpp"
#include "discovars/parallel.hpp"

namespace discovars::depnet {

std::string_view to_string(EdgeDirection direction) {
  return direction == EdgeDirection::child_to_parent ? "child-to-parent" : "parent-to-child";
}

EdgeDirection parse_direction(std::string_view text) {
  if (text == "child-to-parent") return EdgeDirection::child_to_parent;
  if (text == "parent-to-child") return EdgeDirection::parent_to_child;
  throw ArgumentError("unknown edge direction '" + std::string(text) + "'");
}

double DependencyNetwork::density() const {
  const double d = static_cast<double>(nodes.size());
  return d < 2 ? 0.0 : static_cast<double>(edges.size()) / (d * (d - 1.0));
}

namespace {

struct Task {
  std::optional<linmod::FitResult> fit;
  std::string error;
};

}  // namespace

DependencyNetwork build_network(const DataTable& table, const linmod::SelectionMethod& method,
                                const BuildOptions& options) {
  table.validate();
  method.validate();
  const std::size_t d = table.cols();
  if (d < 3) throw DataError("network construction needs at least 3 columns");
  if (table.rows() < 2) throw DataError("network construction needs at least 2 rows");
  if (auto dropped = ingest::drop_constant_columns(table).dropped; !dropped.empty()) {
    throw DataError("constant column '" + dropped.front() + "' must be removed first");
  }

  const bool is_lasso = method.kind == linmod::Method::lasso;
  const double lambda = is_lasso ? method.resolve_lambda(table.rows()) : 0.0;
  // Lasso: standardized predictors, response centered on its own scale
  const Eigen::MatrixXd predictors = is_lasso ? ingest::standardize(table).first.values : table.values;

  std::vector<Task> tasks(d);
  std::atomic<bool> cancelled{false};

  auto run_one = [&](std::size_t i) {
    std::vector<std::string> names;
    names.reserve(d - 1);
    Eigen::MatrixXd x(predictors.rows(), static_cast<Eigen::Index>(d - 1));
    for (std::size_t j = 0, c = 0; j < d; ++j) {
      if (j == i) continue;
      x.col(static_cast<Eigen::Index>(c++)) = predictors.col(static_cast<Eigen::Index>(j));
      names.push_back(table.names[j]);
    }
    Eigen::VectorXd y = table.values.col(static_cast<Eigen::Index>(i));
    linmod::Design design{x, names};
    if (is_lasso) {
      y.array() -= y.mean();
      return linmod::lasso_fit(design, y, lambda);
    }
    return linmod::fit_with(method, design, y);
  };

  parallel_for(
      d, options.threads,
      [&](std::size_t i) {
        try {
          tasks[i].fit = run_one(i);
        } catch (const std::exception& e) {
          tasks[i].error = e.what();
          cancelled.store(true);
        }
      },
      [&] { return cancelled.load(); });

  for (std::size_t i = 0; i < d; ++i) {
    if (!tasks[i].error.empty()) {
      throw NumericError("regression for '" + table.names[i] + "' failed: " + tasks[i].error);
    }
  }

  DependencyNetwork net;
  net.nodes = table.names;
  net.method = method;
  net.lambda = lambda;
  net.direction = options.direction;
  for (std::size_t i = 0; i < d; ++i) {
    const linmod::FitResult& fit = *tasks[i].fit;
    for (const auto& name : fit.selected) {
      std::size_t s = table.require_index(name);
      if (options.direction == EdgeDirection::child_to_parent) net.edges.emplace_back(i, s);
      else net.edges.emplace_back(s, i);
    }
    net.summaries.push_back({fit.selected, fit.rss, fit.hit_iteration_cap});
  }
  std::sort(net.edges.begin(), net.edges.end());
  return net;
}

std::string to_edge_list(const DependencyNetwork& network) {
  std::vector<std::pair<std::string, std::string>> named;
  named.reserve(network.edges.size());
  for (const auto& [u, v] : network.edges) named.emplace_back(network.nodes[u], network.nodes[v]);
  std::sort(named.begin(), named.end());
  std::string out = "source,target\n";
  for (const auto& [a, b] : named) out += a + "," + b + "\n";
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_edge_list(std::string_view text,
                                                                  const std::vector<std::string>& nodes) {
  auto doc = ingest::parse_csv(text, true);
  if (doc.header.size() != 2) throw DataError("edge list must have exactly two columns");
  auto index = [&](const std::string& name) {
    auto it = std::find(nodes.begin(), nodes.end(), name);
    if (it == nodes.end()) throw DataError("edge list names unknown node '" + name + "'");
    return static_cast<std::size_t>(it - nodes.begin());
  };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& row : doc.rows) edges.emplace_back(index(row[0]), index(row[1]));
  std::sort(edges.begin(), edges.end());
  return edges;
}

}  // namespace discovars::depnet
