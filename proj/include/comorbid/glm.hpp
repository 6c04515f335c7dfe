#pragma once

#include <Eigen/Dense>

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace comorbid::glm {

// sigma(x) = exp(x)/(1+exp(x)), two-branch form that never overflows.
double sigmoid(double x);

// log(sigmoid(x)) without overflow or catastrophic cancellation.
double log_sigmoid(double x);

// Inverse standard normal CDF, Acklam's rational approximation with one
// Halley refinement step (|error| well below 1.15e-9).
double inverse_normal_cdf(double p);

// Two-sided z quantile for a confidence level; 0.95 is pinned to 1.959964.
double normal_quantile_for_level(double level);

struct DesignMatrix {
  Eigen::MatrixXd values;                 // n x d, first column all ones
  std::vector<std::string> column_names;  // length d, [0] == kInterceptColumn

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index d() const { return values.cols(); }

  // Enforces the type invariants (shape, intercept column, finite entries).
  void validate() const;
};

enum class WeightKind { none, rare_event };

// Which weighting to apply when fitting whole models; the per-equation tau
// comes from the NetworkSpec.
enum class WeightingPolicy { none, rare_event };

struct Weighting {
  WeightKind kind = WeightKind::none;
  std::optional<double> tau;
  double w1 = 1.0;  // weight on events
  double w0 = 1.0;  // weight on non-events
};

// w1 = tau/ybar, w0 = (1-tau)/(1-ybar) for sample event fraction ybar.
Weighting rare_event_weights(double tau, const Eigen::VectorXd& y);

struct FitOptions {
  double grad_tol = 1e-8;       // max-norm convergence threshold
  int max_iter = 100;
  int max_halvings = 30;        // step-halving line search depth
  double separation_bound = 15.0;  // |coefficient| flag on the logit scale
  double ridge = 1e-10;         // diagonal fallback on factorization failure
};

struct EquationParams {
  std::map<std::string, double> coefficients;
  bool converged = false;
  int iterations = 0;
  double final_nll = std::numeric_limits<double>::quiet_NaN();
  bool separation_suspected = false;
  std::vector<double> nll_trace;       // objective after each accepted step
  std::vector<std::string> warnings;

  // Coefficients as a vector in the given column order; throws if the keys
  // do not exactly match the column list.
  Eigen::VectorXd coef_vector(const std::vector<std::string>& columns) const;
};

// Weighted negative log-likelihood
//   -w1 * sum_j y_j log(sigma(z_j' theta)) - w0 * sum_j (1-y_j) log(1-sigma)
// With kind == none this is the standard logistic NLL (w1 = w0 = 1).
double weighted_nll(const Eigen::VectorXd& theta, const DesignMatrix& X,
                    const Eigen::VectorXd& y, const Weighting& w);
Eigen::VectorXd nll_gradient(const Eigen::VectorXd& theta, const DesignMatrix& X,
                             const Eigen::VectorXd& y, const Weighting& w);
Eigen::MatrixXd nll_hessian(const Eigen::VectorXd& theta, const DesignMatrix& X,
                            const Eigen::VectorXd& y, const Weighting& w);

// Map-keyed convenience overloads evaluating at params.coefficients.
double weighted_nll(const EquationParams& params, const DesignMatrix& X,
                    const Eigen::VectorXd& y, const Weighting& w);
Eigen::VectorXd nll_gradient(const EquationParams& params, const DesignMatrix& X,
                             const Eigen::VectorXd& y, const Weighting& w);
Eigen::MatrixXd nll_hessian(const EquationParams& params, const DesignMatrix& X,
                            const Eigen::VectorXd& y, const Weighting& w);

// Newton-Raphson with step-halving from theta = 0. Accepted steps never
// increase the objective. Non-convergence returns the best iterate with
// converged = false (separation_suspected set when a coefficient passed the
// separation bound); an all-constant response or a Hessian that stays
// singular after the ridge retry throws.
EquationParams fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                   const Weighting& w = {}, const FitOptions& opts = {});

struct OddsRatio {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct InferenceStats {
  std::map<std::string, double> standard_errors;
  std::map<std::string, OddsRatio> odds_ratios;
  Eigen::MatrixXd covariance;  // inverse Hessian at the fitted theta
};

// OR = exp(theta), CI = exp(theta -/+ z * se).
OddsRatio odds_ratio_ci(double coefficient, double standard_error, double level = 0.95);

InferenceStats inference_stats(const EquationParams& params, const DesignMatrix& X,
                               const Eigen::VectorXd& y, const Weighting& w,
                               double level = 0.95);

}  // namespace comorbid::glm
