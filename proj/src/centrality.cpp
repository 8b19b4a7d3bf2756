#include "discovars/centrality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "discovars/error.hpp"

namespace discovars::centrality {

Digraph::Digraph(std::size_t node_count, std::vector<std::pair<std::size_t, std::size_t>> edge_list)
    : n(node_count), edges(std::move(edge_list)) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw ArgumentError("edge endpoint out of range");
    if (u == v) throw ArgumentError("self-loop on node " + std::to_string(u));
    if (!seen.insert({u, v}).second) throw ArgumentError("duplicate edge");
  }
  std::sort(edges.begin(), edges.end());
}

Eigen::MatrixXd Digraph::adjacency() const {
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  for (const auto& [u, v] : edges) a(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = 1.0;
  return a;
}

std::vector<std::vector<std::size_t>> Digraph::out_neighbors() const {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [u, v] : edges) adj[u].push_back(v);
  return adj;
}

Digraph Digraph::relabeled(std::span<const std::size_t> new_index) const {
  if (new_index.size() != n) throw ArgumentError("relabeling size mismatch");
  std::vector<std::pair<std::size_t, std::size_t>> e;
  e.reserve(edges.size());
  for (const auto& [u, v] : edges) e.emplace_back(new_index[u], new_index[v]);
  return Digraph(n, std::move(e));
}

std::string_view to_string(Measure measure) {
  switch (measure) {
    case Measure::alpha: return "alpha";
    case Measure::authority: return "authority";
    case Measure::betweenness: return "betweenness";
    case Measure::closeness: return "closeness";
    case Measure::degree: return "degree";
    case Measure::eigen: return "eigen";
    case Measure::hub: return "hub";
    case Measure::pagerank: return "pagerank";
    case Measure::power: return "power";
  }
  return "unknown";
}

Measure parse_measure(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Measure m : kAllMeasures) {
    if (to_string(m) == s) return m;
  }
  throw ArgumentError("unknown centrality measure '" + std::string(text) + "'");
}

void MeasureParams::validate() const {
  if (!(damping > 0.0 && damping < 1.0)) throw ArgumentError("damping must lie in (0,1)");
  if (!(attenuation > 0.0 && attenuation < 1.0)) throw ArgumentError("attenuation must lie in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("power beta must lie in (0,1)");
}

namespace {

constexpr int kPowerCap = 100000;
constexpr double kPowerTol = 1e-13;

CentralityScores make_scores(Measure measure, std::vector<double> scores) {
  CentralityScores out;
  out.measure = measure;
  out.scores = std::move(scores);
  out.ranking = stable_ranking(out.scores);
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Strongly connected components (iterative Tarjan). Returns component id per node.
std::vector<std::size_t> strong_components(const Digraph& g, std::size_t& count) {
  const auto adj = g.out_neighbors();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(g.n, kUnset), low(g.n, 0), comp(g.n, kUnset);
  std::vector<bool> on_stack(g.n, false);
  std::vector<std::size_t> stack;
  std::size_t next = 0;
  count = 0;

  for (std::size_t root = 0; root < g.n; ++root) {
    if (index[root] != kUnset) continue;
    std::vector<std::pair<std::size_t, std::size_t>> frames{{root, 0}};
    index[root] = low[root] = next++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, edge_pos] = frames.back();
      if (edge_pos < adj[v].size()) {
        std::size_t w = adj[v][edge_pos++];
        if (index[w] == kUnset) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != done);
        ++count;
      }
    }
  }
  return comp;
}

/// Perron root of an irreducible nonnegative block, bracketed by
/// Collatz-Wielandt bounds on the primitive shift B + I.
double perron_root(const Eigen::MatrixXd& block) {
  const Eigen::Index k = block.rows();
  Eigen::MatrixXd shifted = block + Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(k);
  for (int it = 0; it < kPowerCap; ++it) {
    Eigen::VectorXd y = shifted * x;
    Eigen::ArrayXd ratio = y.array() / x.array();
    double lo = ratio.minCoeff();
    double hi = ratio.maxCoeff();
    if (hi - lo <= 1e-14 * hi) return 0.5 * (lo + hi) - 1.0;
    x = y / y.maxCoeff();
  }
  throw NumericError("spectral radius estimate did not converge");
}

struct SpectralInfo {
  double radius = 0.0;
  std::size_t dominant_components = 0;
};

SpectralInfo spectral_info(const Digraph& g) {
  std::size_t count = 0;
  auto comp = strong_components(g, count);
  std::vector<std::vector<std::size_t>> members(count);
  for (std::size_t v = 0; v < g.n; ++v) members[comp[v]].push_back(v);

  const Eigen::MatrixXd a = g.adjacency();
  std::vector<double> roots;
  for (const auto& mem : members) {
    if (mem.size() < 2) continue;
    const auto k = static_cast<Eigen::Index>(mem.size());
    Eigen::MatrixXd block(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        block(i, j) = a(static_cast<Eigen::Index>(mem[static_cast<std::size_t>(i)]),
                        static_cast<Eigen::Index>(mem[static_cast<std::size_t>(j)]));
      }
    }
    roots.push_back(perron_root(block));
  }
  SpectralInfo info;
  for (double r : roots) info.radius = std::max(info.radius, r);
  for (double r : roots) {
    if (info.radius > 0.0 && std::abs(r - info.radius) <= 1e-9 * info.radius) ++info.dominant_components;
  }
  return info;
}

/// Power iteration x <- M x (max-normalized) from the all-ones vector.
Eigen::VectorXd power_iterate(const Eigen::MatrixXd& m, std::string_view what) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(m.rows());
  for (int it = 0; it < kPowerCap; ++it) {
    Eigen::VectorXd y = m * x;
    double top = y.cwiseAbs().maxCoeff();
    if (top == 0.0) throw NumericError(std::string(what) + ": iteration collapsed to zero");
    y /= top;
    double change = (y - x).cwiseAbs().maxCoeff();
    x = std::move(y);
    if (change < kPowerTol) return x;
  }
  throw NumericError(std::string(what) + ": power iteration did not converge");
}

/// Dominant eigenvector of a symmetric positive semidefinite matrix,
/// normalized to max 1; all ones when the matrix is zero.
std::vector<double> psd_dominant(const Eigen::MatrixXd& m, std::string_view what) {
  if (m.isZero(0.0)) return std::vector<double>(static_cast<std::size_t>(m.rows()), 1.0);
  return to_std(power_iterate(m, what));
}

}  // namespace

double spectral_radius(const Digraph& g) { return spectral_info(g).radius; }

std::vector<std::size_t> stable_ranking(std::span<const double> scores) {
  double scale = 0.0;
  for (double s : scores) scale = std::max(scale, std::abs(s));
  if (scale == 0.0) scale = 1.0;
  // scores equal to within 1e-12 of the largest magnitude count as ties
  std::vector<double> keys(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) keys[i] = std::round(scores[i] / scale * 1e12);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  return order;
}

CentralityScores degree(const Digraph& g) {
  std::vector<double> deg(g.n, 0.0);
  for (const auto& [u, v] : g.edges) {
    deg[u] += 1.0;
    deg[v] += 1.0;
  }
  return make_scores(Measure::degree, std::move(deg));
}

CentralityScores pagerank(const Digraph& g, double damping) {
  if (!(damping > 0.0 && damping < 1.0)) throw ArgumentError("damping must lie in (0,1)");
  if (g.n == 0) throw ArgumentError("pagerank of an empty graph");
  const auto adj = g.out_neighbors();
  const double n = static_cast<double>(g.n);
  std::vector<double> x(g.n, 1.0 / n), next(g.n);
  for (int it = 0; it < 1000; ++it) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < g.n; ++u) {
      if (adj[u].empty()) dangling += x[u];
    }
    std::fill(next.begin(), next.end(), (1.0 - damping) / n + damping * dangling / n);
    for (std::size_t u = 0; u < g.n; ++u) {
      if (adj[u].empty()) continue;
      double share = damping * x[u] / static_cast<double>(adj[u].size());
      for (std::size_t v : adj[u]) next[v] += share;
    }
    double total = std::accumulate(next.begin(), next.end(), 0.0);
    double change = 0.0;
    for (std::size_t v = 0; v < g.n; ++v) {
      next[v] /= total;
      change += std::abs(next[v] - x[v]);
    }
    x.swap(next);
    if (change < 1e-10) {
      CentralityScores out = make_scores(Measure::pagerank, std::move(x));
      out.params.damping = damping;
      return out;
    }
  }
  throw NumericError("pagerank did not converge in 1000 iterations");
}

std::pair<CentralityScores, CentralityScores> hits(const Digraph& g) {
  const Eigen::MatrixXd a = g.adjacency();
  auto hub = make_scores(Measure::hub, psd_dominant(a * a.transpose(), "hub"));
  auto auth = make_scores(Measure::authority, psd_dominant(a.transpose() * a, "authority"));
  return {std::move(hub), std::move(auth)};
}

CentralityScores eigen(const Digraph& g) {
  const Eigen::MatrixXd a = g.adjacency();
  const auto n = static_cast<Eigen::Index>(g.n);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  SpectralInfo info = spectral_info(g);
  if (info.radius > 0.0 && info.dominant_components == 1) {
    // in-link accumulation: x_v proportional to the sum of x_u over u -> v
    return make_scores(Measure::eigen, to_std(power_iterate(a.transpose() + identity, "eigen")));
  }
  Eigen::MatrixXd sym = a + a.transpose();
  CentralityScores out = make_scores(
      Measure::eigen, sym.isZero(0.0) ? std::vector<double>(g.n, 1.0)
                                      : to_std(power_iterate(sym + identity, "eigen (symmetrized)")));
  out.fallback_used = true;
  return out;
}

CentralityScores betweenness(const Digraph& g) {
  const auto adj = g.out_neighbors();
  std::vector<double> cb(g.n, 0.0);
  std::vector<std::vector<std::size_t>> preds(g.n);
  std::vector<double> sigma(g.n), delta(g.n);
  std::vector<long> dist(g.n);
  std::vector<std::size_t> order;

  for (std::size_t s = 0; s < g.n; ++s) {
    for (auto& p : preds) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<std::size_t> queue{s};
    while (!queue.empty()) {
      std::size_t v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (std::size_t w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      std::size_t w = *it;
      for (std::size_t v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  return make_scores(Measure::betweenness, std::move(cb));
}

CentralityScores closeness(const Digraph& g) {
  const auto adj = g.out_neighbors();
  std::vector<double> out(g.n, 0.0);
  std::vector<long> dist(g.n);
  for (std::size_t u = 0; u < g.n; ++u) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[u] = 0;
    std::deque<std::size_t> queue{u};
    double reached = 1.0;
    double total = 0.0;
    while (!queue.empty()) {
      std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t w : adj[v]) {
        if (dist[w] >= 0) continue;
        dist[w] = dist[v] + 1;
        reached += 1.0;
        total += static_cast<double>(dist[w]);
        queue.push_back(w);
      }
    }
    if (reached > 1.0 && g.n > 1) {
      out[u] = (reached - 1.0) / total * (reached - 1.0) / static_cast<double>(g.n - 1);
    }
  }
  return make_scores(Measure::closeness, std::move(out));
}

namespace {

Eigen::VectorXd solve_checked(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs, std::string_view what) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw NumericError(std::string(what) + ": singular linear system");
  return lu.solve(rhs);
}

double attenuation_base(const Digraph& g) {
  double rho = spectral_radius(g);
  return rho > 0.0 ? rho : 1.0;
}

}  // namespace

CentralityScores alpha(const Digraph& g, double attenuation) {
  if (!(attenuation > 0.0 && attenuation < 1.0)) throw ArgumentError("attenuation must lie in (0,1)");
  const auto n = static_cast<Eigen::Index>(g.n);
  const double factor = attenuation / attenuation_base(g);
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - factor * g.adjacency().transpose();
  CentralityScores out =
      make_scores(Measure::alpha, to_std(solve_checked(system, Eigen::VectorXd::Ones(n), "alpha")));
  out.params.attenuation = attenuation;
  return out;
}

CentralityScores power(const Digraph& g, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("power beta must lie in (0,1)");
  const auto n = static_cast<Eigen::Index>(g.n);
  const Eigen::MatrixXd a = g.adjacency();
  const double factor = beta / attenuation_base(g);
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - factor * a;
  Eigen::VectorXd c = solve_checked(system, a * Eigen::VectorXd::Ones(n), "power");
  double norm2 = c.squaredNorm();
  if (norm2 > 0.0) c *= std::sqrt(static_cast<double>(n) / norm2);
  CentralityScores out = make_scores(Measure::power, to_std(c));
  out.params.beta = beta;
  return out;
}

CentralityScores compute(const Digraph& g, Measure measure, const MeasureParams& params) {
  params.validate();
  if (g.n == 0) throw ArgumentError("centrality of an empty graph");
  CentralityScores out;
  switch (measure) {
    case Measure::alpha: out = alpha(g, params.attenuation); break;
    case Measure::authority: out = hits(g).second; break;
    case Measure::betweenness: out = betweenness(g); break;
    case Measure::closeness: out = closeness(g); break;
    case Measure::degree: out = degree(g); break;
    case Measure::eigen: out = eigen(g); break;
    case Measure::hub: out = hits(g).first; break;
    case Measure::pagerank: out = pagerank(g, params.damping); break;
    case Measure::power: out = power(g, params.beta); break;
  }
  out.params = params;
  return out;
}

std::vector<std::string> rank_top_n(const CentralityScores& scores, std::span<const std::string> names,
                                    std::size_t n) {
  if (names.size() != scores.scores.size()) throw ArgumentError("name count does not match scores");
  if (n < 1 || n > names.size()) {
    throw ArgumentError("n must lie in [1, " + std::to_string(names.size()) + "], got " + std::to_string(n));
  }
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(names[scores.ranking[i]]);
  return out;
}

}  // namespace discovars::centrality
