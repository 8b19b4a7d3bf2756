#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace discovars::linmod {

enum class Method { stepwise, forward, step_aic, lasso };

std::string_view to_string(Method method);
/// Accepts "stepwise", "forward", "stepaic"/"aic", "lasso" (case-insensitive).
Method parse_method(std::string_view text);

/// Variable-selection procedure plus its parameters.
struct SelectionMethod {
  Method kind = Method::stepwise;
  double p_enter = 0.1;
  double p_exit = 0.25;
  /// Empty means the 16/m default, resolved per dataset.
  std::optional<double> lasso_lambda;

  void validate() const;
  [[nodiscard]] double resolve_lambda(std::size_t n_obs) const;
};

/// One estimated term of a fitted model. Inference fields are empty for Lasso.
struct Term {
  std::string name;
  double estimate = 0.0;
  std::optional<double> std_error;
  std::optional<double> t_stat;
  std::optional<double> p_value;
};

struct FitResult {
  double intercept = 0.0;
  /// Terms of the final model (all offered predictors for ols_fit and Lasso).
  std::vector<Term> terms;
  double rss = 0.0;
  /// Significant predictors, in the order the procedure admitted them
  /// (column order for ols_fit and Lasso).
  std::vector<std::string> selected;
  std::size_t n_obs = 0;
  int iterations = 0;
  bool hit_iteration_cap = false;
  /// Lasso objective after each sweep, when requested.
  std::vector<double> objective_trace;

  [[nodiscard]] const Term* find(std::string_view name) const;
};

/// Predictor matrix with column names; y is passed separately.
struct Design {
  const Eigen::MatrixXd& x;
  std::span<const std::string> names;
};

/// Two-sided Student-t tail 2 P(T > |t|) with `df` degrees of freedom.
double student_t_sf(double t, double df);

/// Least squares with intercept via Householder QR. Throws NumericError on a
/// rank-deficient design (message names the aliased columns) and
/// ArgumentError when n <= p + 1.
FitResult ols_fit(const Design& design, const Eigen::VectorXd& y);

/// Bidirectional p-value search: admit the smallest-p candidate if
/// p <= p_enter, then evict included terms with p >= p_exit (largest first).
/// Stops when a round changes nothing or after 2d rounds.
FitResult stepwise_select(const Design& design, const Eigen::VectorXd& y,
                          double p_enter = 0.1, double p_exit = 0.25);

FitResult forward_select(const Design& design, const Eigen::VectorXd& y, double p_enter = 0.1);

/// AIC used by aic_select: n ln(RSS/n) + 2 (k + 1) for k predictors.
double aic_value(double rss, std::size_t n_obs, std::size_t n_predictors);

/// Greedy bidirectional AIC search starting from the full model.
FitResult aic_select(const Design& design, const Eigen::VectorXd& y);

struct LassoOptions {
  double tolerance = 1e-7;
  int max_sweeps = 100000;
  bool record_objective = false;
};

/// Minimizes (1/(2m)) ||y - X b||^2 + lambda ||b||_1 by cyclic coordinate
/// descent. X must be standardized (mean 0, population sd 1 per column) and
/// y centered.
FitResult lasso_fit(const Design& design, const Eigen::VectorXd& y, double lambda,
                    const LassoOptions& options = {});

double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda);

/// Runs the configured procedure. For Lasso the predictors are standardized
/// and y centered here, so raw data may be passed.
FitResult fit_with(const SelectionMethod& method, const Design& design, const Eigen::VectorXd& y);

}  // namespace discovars::linmod
