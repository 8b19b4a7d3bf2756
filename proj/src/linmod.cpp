#include "discovars/linmod.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "discovars/error.hpp"

namespace discovars::linmod {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::stepwise: return "stepwise";
    case Method::forward: return "forward";
    case Method::step_aic: return "stepaic";
    case Method::lasso: return "lasso";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "stepwise") return Method::stepwise;
  if (s == "forward") return Method::forward;
  if (s == "stepaic" || s == "aic" || s == "step_aic") return Method::step_aic;
  if (s == "lasso") return Method::lasso;
  throw ArgumentError("unknown selection method '" + std::string(text) + "'");
}

void SelectionMethod::validate() const {
  auto in_unit = [](double p) { return p > 0.0 && p < 1.0; };
  if (kind == Method::stepwise || kind == Method::forward) {
    if (!in_unit(p_enter)) throw ArgumentError("p_enter must lie in (0,1)");
  }
  if (kind == Method::stepwise) {
    if (!in_unit(p_exit)) throw ArgumentError("p_exit must lie in (0,1)");
    if (!(p_enter < p_exit)) throw ArgumentError("p_enter must be smaller than p_exit");
  }
  if (kind == Method::lasso && lasso_lambda && !(*lasso_lambda > 0.0)) {
    throw ArgumentError("lasso lambda must be positive");
  }
}

double SelectionMethod::resolve_lambda(std::size_t n_obs) const {
  if (lasso_lambda) return *lasso_lambda;
  if (n_obs == 0) throw ArgumentError("cannot resolve lambda for an empty table");
  return 16.0 / static_cast<double>(n_obs);
}

const Term* FitResult::find(std::string_view name) const {
  auto it = std::find_if(terms.begin(), terms.end(), [&](const Term& t) { return t.name == name; });
  return it == terms.end() ? nullptr : &*it;
}

double student_t_sf(double t, double df) {
  if (!(df >= 1.0)) throw ArgumentError("student_t_sf: df must be >= 1");
  if (std::isnan(t)) throw ArgumentError("student_t_sf: t is NaN");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  double x = df / (df + t * t);
  return std::clamp(boost::math::ibeta(df / 2.0, 0.5, x), 0.0, 1.0);
}

namespace {

constexpr double kAliasThreshold = 1e-10;

/// Least-squares solve on [1, X(:, cols)].
struct CoreFit {
  std::vector<std::size_t> aliased;  // positions into cols
  Eigen::VectorXd beta;              // intercept first
  Eigen::VectorXd se;                // empty unless requested
  double rss = 0.0;
  long df = 0;
};

CoreFit core_fit(const Eigen::MatrixXd& x, std::span<const std::size_t> cols,
                 const Eigen::VectorXd& y, bool with_inference) {
  const Eigen::Index n = x.rows();
  const auto k = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd a(n, k + 1);
  a.col(0).setOnes();
  for (Eigen::Index j = 0; j < k; ++j) a.col(j + 1) = x.col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)]));

  CoreFit fit;
  fit.df = static_cast<long>(n) - static_cast<long>(k) - 1;

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  const Eigen::Index p = std::min(n, k + 1);
  for (Eigen::Index j = 0; j < k + 1; ++j) {
    double norm = a.col(j).norm();
    double pivot = j < p ? std::abs(packed(j, j)) : 0.0;
    if (!(pivot > kAliasThreshold * std::max(norm, 1e-300))) {
      if (j == 0) throw NumericError("design has a zero intercept column");
      fit.aliased.push_back(static_cast<std::size_t>(j - 1));
    }
  }
  if (!fit.aliased.empty()) return fit;

  auto r = packed.topLeftCorner(k + 1, k + 1).triangularView<Eigen::Upper>();
  Eigen::VectorXd qty = qr.householderQ().transpose() * y;
  fit.beta = r.solve(qty.head(k + 1));
  fit.rss = (y - a * fit.beta).squaredNorm();

  if (with_inference && fit.df > 0) {
    Eigen::MatrixXd rinv = r.solve(Eigen::MatrixXd::Identity(k + 1, k + 1));
    double sigma2 = fit.rss / static_cast<double>(fit.df);
    fit.se = (rinv.rowwise().squaredNorm() * sigma2).cwiseSqrt();
  }
  return fit;
}

double p_value_of(double estimate, double se, long df) {
  if (se == 0.0) return estimate == 0.0 ? 1.0 : 0.0;
  return student_t_sf(estimate / se, static_cast<double>(df));
}

double abs_t(double estimate, double se) {
  if (se == 0.0) return estimate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(estimate / se);
}

void check_shapes(const Design& design, const Eigen::VectorXd& y) {
  if (design.names.size() != static_cast<std::size_t>(design.x.cols())) {
    throw ArgumentError("predictor name count does not match design width");
  }
  if (y.size() != design.x.rows()) throw ArgumentError("response length does not match design");
  if (design.x.rows() < 2) throw ArgumentError("need at least 2 observations");
}

std::string describe_aliased(const Design& design, std::span<const std::size_t> cols,
                             const std::vector<std::size_t>& aliased) {
  std::string msg = "rank-deficient design; collinear column(s):";
  for (auto pos : aliased) msg += " " + design.names[cols[pos]];
  return msg;
}

/// Full inference fit on a column subset; throws on aliasing.
FitResult inference_fit(const Design& design, std::span<const std::size_t> cols,
                        const Eigen::VectorXd& y) {
  const std::size_t n = static_cast<std::size_t>(design.x.rows());
  if (n <= cols.size() + 1) {
    throw ArgumentError("need more observations (" + std::to_string(n) + ") than predictors + 1 (" +
                        std::to_string(cols.size() + 1) + ")");
  }
  CoreFit core = core_fit(design.x, cols, y, true);
  if (!core.aliased.empty()) throw NumericError(describe_aliased(design, cols, core.aliased));

  FitResult out;
  out.n_obs = n;
  out.intercept = core.beta(0);
  out.rss = core.rss;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    Term t;
    t.name = design.names[cols[j]];
    t.estimate = core.beta(static_cast<Eigen::Index>(j + 1));
    double se = core.se(static_cast<Eigen::Index>(j + 1));
    t.std_error = se;
    t.t_stat = se == 0.0 ? (t.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), t.estimate))
                         : t.estimate / se;
    t.p_value = p_value_of(t.estimate, se, core.df);
    out.terms.push_back(std::move(t));
    out.selected.push_back(design.names[cols[j]]);
  }
  return out;
}

FitResult intercept_only(const Eigen::VectorXd& y) {
  FitResult out;
  out.n_obs = static_cast<std::size_t>(y.size());
  out.intercept = y.mean();
  out.rss = (y.array() - out.intercept).square().sum();
  return out;
}

/// Strength of candidate `cand` when added to `included`; nullopt when the
/// addition is aliased or leaves no residual degrees of freedom.
std::optional<double> entry_strength(const Design& design, std::vector<std::size_t> included,
                                     std::size_t cand, const Eigen::VectorXd& y) {
  included.push_back(cand);
  if (static_cast<std::size_t>(design.x.rows()) <= included.size() + 1) return std::nullopt;
  CoreFit core = core_fit(design.x, included, y, true);
  if (!core.aliased.empty()) return std::nullopt;
  auto last = static_cast<Eigen::Index>(included.size());
  return abs_t(core.beta(last), core.se(last));
}

struct AddStep {
  std::size_t column;
  double p_value;
};

std::optional<AddStep> best_addition(const Design& design, const std::vector<std::size_t>& included,
                                     const Eigen::VectorXd& y) {
  const std::size_t d = design.names.size();
  std::optional<std::size_t> best;
  double best_t = -1.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (std::find(included.begin(), included.end(), j) != included.end()) continue;
    auto t = entry_strength(design, included, j, y);
    if (t && *t > best_t) {
      best_t = *t;
      best = j;
    }
  }
  if (!best) return std::nullopt;
  long df = static_cast<long>(design.x.rows()) - static_cast<long>(included.size()) - 2;
  double p = std::isinf(best_t) ? 0.0 : student_t_sf(best_t, static_cast<double>(df));
  return AddStep{*best, p};
}

FitResult finalize(const Design& design, const std::vector<std::size_t>& included,
                   const Eigen::VectorXd& y) {
  if (included.empty()) return intercept_only(y);
  return inference_fit(design, included, y);
}

}  // namespace

FitResult ols_fit(const Design& design, const Eigen::VectorXd& y) {
  check_shapes(design, y);
  std::vector<std::size_t> cols(design.names.size());
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return inference_fit(design, cols, y);
}

FitResult stepwise_select(const Design& design, const Eigen::VectorXd& y, double p_enter,
                          double p_exit) {
  check_shapes(design, y);
  SelectionMethod{Method::stepwise, p_enter, p_exit, std::nullopt}.validate();
  const std::size_t d = design.names.size();
  const int cap = static_cast<int>(2 * d);

  std::vector<std::size_t> included;
  int rounds = 0;
  bool capped = true;
  for (; rounds < cap; ++rounds) {
    bool changed = false;
    if (auto add = best_addition(design, included, y); add && add->p_value <= p_enter) {
      included.push_back(add->column);
      changed = true;
    }
    while (!included.empty()) {
      CoreFit core = core_fit(design.x, included, y, true);
      std::optional<std::size_t> worst;
      double worst_t = std::numeric_limits<double>::infinity();
      for (std::size_t pos = 0; pos < included.size(); ++pos) {
        auto idx = static_cast<Eigen::Index>(pos + 1);
        double t = abs_t(core.beta(idx), core.se(idx));
        // lower original index wins ties
        if (t < worst_t || (t == worst_t && worst && included[pos] < included[*worst])) {
          worst_t = t;
          worst = pos;
        }
      }
      double p = std::isinf(worst_t) ? 0.0 : student_t_sf(worst_t, static_cast<double>(core.df));
      if (!worst || p < p_exit) break;
      included.erase(included.begin() + static_cast<std::ptrdiff_t>(*worst));
      changed = true;
    }
    if (!changed) {
      capped = false;
      break;
    }
  }
  FitResult out = finalize(design, included, y);
  out.iterations = rounds;
  out.hit_iteration_cap = capped && cap > 0;
  return out;
}

FitResult forward_select(const Design& design, const Eigen::VectorXd& y, double p_enter) {
  check_shapes(design, y);
  SelectionMethod{Method::forward, p_enter, 0.5, std::nullopt}.validate();
  std::vector<std::size_t> included;
  int rounds = 0;
  while (included.size() < design.names.size()) {
    auto add = best_addition(design, included, y);
    if (!add || add->p_value > p_enter) break;
    included.push_back(add->column);
    ++rounds;
  }
  FitResult out = finalize(design, included, y);
  out.iterations = rounds;
  return out;
}

double aic_value(double rss, std::size_t n_obs, std::size_t n_predictors) {
  const double n = static_cast<double>(n_obs);
  double ratio = std::max(rss / n, std::numeric_limits<double>::min());
  return n * std::log(ratio) + 2.0 * static_cast<double>(n_predictors + 1);
}

FitResult aic_select(const Design& design, const Eigen::VectorXd& y) {
  check_shapes(design, y);
  const std::size_t d = design.names.size();
  const std::size_t n = static_cast<std::size_t>(design.x.rows());

  const double tss = (y.array() - y.mean()).square().sum();
  // residuals below this are rounding noise; exact fits then tie and the penalty decides
  const double rss_floor = std::max(tss * 1e-20, std::numeric_limits<double>::min());
  auto score = [&](const std::vector<std::size_t>& cols) -> std::optional<double> {
    if (cols.empty()) return aic_value(std::max(tss, rss_floor), n, 0);
    if (n <= cols.size() + 1) return std::nullopt;
    CoreFit core = core_fit(design.x, cols, y, false);
    if (!core.aliased.empty()) return std::nullopt;
    return aic_value(std::max(core.rss, rss_floor), n, cols.size());
  };

  std::vector<std::size_t> current(d);
  std::iota(current.begin(), current.end(), std::size_t{0});
  // aliased or excess columns cannot start in the model
  while (!current.empty()) {
    if (n <= current.size() + 1) {
      current.pop_back();
      continue;
    }
    CoreFit core = core_fit(design.x, current, y, false);
    if (core.aliased.empty()) break;
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(core.aliased.front()));
  }
  double current_aic = *score(current);

  int rounds = 0;
  for (;; ++rounds) {
    std::optional<std::vector<std::size_t>> best;
    double best_aic = current_aic;
    for (std::size_t pos = 0; pos < current.size(); ++pos) {
      auto cand = current;
      cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(pos));
      if (auto a = score(cand); a && *a < best_aic) {
        best_aic = *a;
        best = std::move(cand);
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (std::find(current.begin(), current.end(), j) != current.end()) continue;
      auto cand = current;
      cand.push_back(j);
      if (auto a = score(cand); a && *a < best_aic) {
        best_aic = *a;
        best = std::move(cand);
      }
    }
    if (!best) break;
    current = std::move(*best);
    current_aic = best_aic;
  }
  std::sort(current.begin(), current.end());
  FitResult out = finalize(design, current, y);
  out.iterations = rounds;
  return out;
}

double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda) {
  const double m = static_cast<double>(x.rows());
  return (y - x * beta).squaredNorm() / (2.0 * m) + lambda * beta.lpNorm<1>();
}

FitResult lasso_fit(const Design& design, const Eigen::VectorXd& y, double lambda,
                    const LassoOptions& options) {
  check_shapes(design, y);
  if (!(lambda > 0.0)) throw ArgumentError("lasso lambda must be positive");
  const Eigen::MatrixXd& x = design.x;
  const Eigen::Index m = x.rows();
  const Eigen::Index d = x.cols();
  const double md = static_cast<double>(m);

  Eigen::VectorXd scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double mean = x.col(j).mean();
    double var = x.col(j).squaredNorm() / md;
    if (std::abs(mean) > 1e-8 || std::abs(var - 1.0) > 1e-6) {
      throw ArgumentError("lasso_fit requires standardized predictors; column '" +
                          design.names[static_cast<std::size_t>(j)] + "' is not");
    }
    scale(j) = var;
  }
  double y_sd = std::sqrt((y.array() - y.mean()).square().sum() / md);
  if (std::abs(y.mean()) > 1e-8 * std::max(1.0, y_sd)) {
    throw ArgumentError("lasso_fit requires a centered response");
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd resid = y;
  FitResult out;
  out.n_obs = static_cast<std::size_t>(m);
  if (options.record_objective) out.objective_trace.push_back(lasso_objective(x, y, beta, lambda));

  int sweep = 0;
  bool converged = false;
  while (sweep < options.max_sweeps) {
    ++sweep;
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      double z = x.col(j).dot(resid) / md + scale(j) * beta(j);
      double shrunk = std::abs(z) - lambda;
      // within rounding of the threshold counts as zero
      if (shrunk <= 1e-12 * lambda) shrunk = 0.0;
      double next = shrunk == 0.0 ? 0.0 : std::copysign(shrunk, z) / scale(j);
      double delta = next - beta(j);
      if (delta != 0.0) {
        resid -= delta * x.col(j);
        beta(j) = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (options.record_objective) out.objective_trace.push_back(lasso_objective(x, y, beta, lambda));
    if (max_delta < options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericError("lasso coordinate descent did not converge in " +
                       std::to_string(options.max_sweeps) + " sweeps");
  }

  out.iterations = sweep;
  out.intercept = 0.0;
  out.rss = (y - x * beta).squaredNorm();
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto& name = design.names[static_cast<std::size_t>(j)];
    out.terms.push_back(Term{name, beta(j), std::nullopt, std::nullopt, std::nullopt});
    if (beta(j) != 0.0) out.selected.push_back(name);
  }
  return out;
}

FitResult fit_with(const SelectionMethod& method, const Design& design, const Eigen::VectorXd& y) {
  method.validate();
  switch (method.kind) {
    case Method::stepwise: return stepwise_select(design, y, method.p_enter, method.p_exit);
    case Method::forward: return forward_select(design, y, method.p_enter);
    case Method::step_aic: return aic_select(design, y);
    case Method::lasso: {
      check_shapes(design, y);
      const double m = static_cast<double>(design.x.rows());
      Eigen::MatrixXd z = design.x;
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        z.col(j).array() -= z.col(j).mean();
        double sd = std::sqrt(z.col(j).squaredNorm() / m);
        if (!(sd > 0.0)) {
          throw NumericError("constant predictor '" + design.names[static_cast<std::size_t>(j)] + "'");
        }
        z.col(j) /= sd;
        z.col(j).array() -= z.col(j).mean();
      }
      double mean = y.mean();
      Eigen::VectorXd centered = y.array() - mean;
      FitResult out = lasso_fit(Design{z, design.names}, centered, method.resolve_lambda(design.x.rows()));
      out.intercept = mean;
      return out;
    }
  }
  throw ArgumentError("unhandled selection method");
}

}  // namespace discovars::linmod
