#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "discovars/centrality.hpp"
#include "discovars/ingest.hpp"
#include "discovars/linmod.hpp"

namespace discovars::depnet {

/// child_to_parent: i -> s when regression i selects s ("i depends on s").
/// parent_to_child: s -> i ("s explains i").
enum class EdgeDirection { child_to_parent, parent_to_child };

std::string_view to_string(EdgeDirection direction);
EdgeDirection parse_direction(std::string_view text);

struct NodeSummary {
  std::vector<std::string> selected;
  double rss = 0.0;
  bool hit_iteration_cap = false;
};

struct DependencyNetwork {
  std::vector<std::string> nodes;
  /// Oriented according to `direction`; sorted by (source, target) index.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  linmod::SelectionMethod method;
  /// Lasso penalty actually used (resolved from 16/m when defaulted).
  double lambda = 0.0;
  EdgeDirection direction = EdgeDirection::child_to_parent;
  /// One per node: the regression with that node as response.
  std::vector<NodeSummary> summaries;

  [[nodiscard]] centrality::Digraph graph() const { return {nodes.size(), edges}; }
  [[nodiscard]] double density() const;
};

struct BuildOptions {
  EdgeDirection direction = EdgeDirection::child_to_parent;
  /// 0 = DISCOVARS_THREADS if set, else hardware concurrency.
  std::size_t threads = 0;
};

/// Regresses every column on all the others with `method` and links each
/// response to its selected predictors. Responses are fitted concurrently;
/// the result does not depend on the thread count.
DependencyNetwork build_network(const DataTable& table, const linmod::SelectionMethod& method,
                                const BuildOptions& options = {});

/// "source,target" header followed by one name pair per edge, sorted.
std::string to_edge_list(const DependencyNetwork& network);

/// Parses to_edge_list output back into index pairs over `nodes`.
std::vector<std::pair<std::size_t, std::size_t>> parse_edge_list(std::string_view text,
                                                                  const std::vector<std::string>& nodes);

}  // namespace discovars::depnet
