#include "comorbid/glm.hpp"

#include <cmath>
#include <sstream>

#include "comorbid/errors.hpp"
#include "comorbid/model_spec.hpp"

namespace comorbid::glm {

namespace {

constexpr double kZ95 = 1.959964;

void check_response(const DesignMatrix& X, const Eigen::VectorXd& y) {
  if (y.size() != X.n()) {
    std::ostringstream msg;
    msg << "response length " << y.size() << " does not match design rows " << X.n();
    throw ValidationError(msg.str());
  }
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0)
      throw ValidationError("response entries must be 0 or 1");
}

// Per-row total weight kappa_j = w1*y_j + w0*(1-y_j).
Eigen::VectorXd row_weights(const Eigen::VectorXd& y, const Weighting& w) {
  return w.w1 * y.array() + w.w0 * (1.0 - y.array());
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError("inverse_normal_cdf requires p in (0,1)");

  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley refinement step against the true CDF.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double normal_quantile_for_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("confidence level must lie in (0,1)");
  if (level == 0.95) return kZ95;
  return inverse_normal_cdf(0.5 + level / 2.0);
}

void DesignMatrix::validate() const {
  if (values.rows() < 1) throw ValidationError("design matrix needs at least one row");
  if (static_cast<std::size_t>(values.cols()) != column_names.size())
    throw ValidationError("design column_names length does not match matrix width");
  if (column_names.empty() || column_names[0] != kInterceptColumn)
    throw ValidationError("first design column must be the intercept");
  if ((values.col(0).array() != 1.0).any())
    throw ValidationError("intercept column must be constant 1");
  if (!values.allFinite()) throw ValidationError("design matrix entries must be finite");
}

Weighting rare_event_weights(double tau, const Eigen::VectorXd& y) {
  if (!(tau > 0.0 && tau < 1.0)) {
    std::ostringstream msg;
    msg << "tau must lie strictly in (0,1), got " << tau;
    throw ValidationError(msg.str());
  }
  const double ybar = y.mean();
  if (!(ybar > 0.0 && ybar < 1.0))
    throw NumericError("sample event fraction is degenerate (all 0 or all 1)");
  Weighting w;
  w.kind = WeightKind::rare_event;
  w.tau = tau;
  w.w1 = tau / ybar;
  w.w0 = (1.0 - tau) / (1.0 - ybar);
  return w;
}

Eigen::VectorXd EquationParams::coef_vector(const std::vector<std::string>& columns) const {
  if (coefficients.size() != columns.size())
    throw ValidationError("coefficient keys do not match design columns");
  Eigen::VectorXd theta(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    auto it = coefficients.find(columns[k]);
    if (it == coefficients.end())
      throw ValidationError("missing coefficient for design column '" + columns[k] + "'");
    theta[static_cast<Eigen::Index>(k)] = it->second;
  }
  return theta;
}

double weighted_nll(const Eigen::VectorXd& theta, const DesignMatrix& X,
                    const Eigen::VectorXd& y, const Weighting& w) {
  check_response(X, y);
  if (theta.size() != X.d()) throw ValidationError("theta length does not match design width");
  const Eigen::VectorXd eta = X.values * theta;
  double nll = 0.0;
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    // log sigma(eta) for events, log sigma(-eta) for non-events
    nll -= y[j] == 1.0 ? w.w1 * log_sigmoid(eta[j]) : w.w0 * log_sigmoid(-eta[j]);
  }
  return nll;
}

Eigen::VectorXd nll_gradient(const Eigen::VectorXd& theta, const DesignMatrix& X,
                             const Eigen::VectorXd& y, const Weighting& w) {
  check_response(X, y);
  if (theta.size() != X.d()) throw ValidationError("theta length does not match design width");
  const Eigen::VectorXd eta = X.values * theta;
  const Eigen::ArrayXd p = eta.unaryExpr([](double t) { return sigmoid(t); }).array();
  const Eigen::ArrayXd kappa = row_weights(y, w).array();
  // residual_j = kappa_j * sigma_j - w1 * y_j
  const Eigen::VectorXd residual = (kappa * p - w.w1 * y.array()).matrix();
  return X.values.transpose() * residual;
}

Eigen::MatrixXd nll_hessian(const Eigen::VectorXd& theta, const DesignMatrix& X,
                            const Eigen::VectorXd& y, const Weighting& w) {
  check_response(X, y);
  if (theta.size() != X.d()) throw ValidationError("theta length does not match design width");
  const Eigen::VectorXd eta = X.values * theta;
  const Eigen::ArrayXd p = eta.unaryExpr([](double t) { return sigmoid(t); }).array();
  const Eigen::ArrayXd kappa = row_weights(y, w).array();
  const Eigen::ArrayXd v = kappa * p * (1.0 - p);
  return X.values.transpose() * v.matrix().asDiagonal() * X.values;
}

double weighted_nll(const EquationParams& params, const DesignMatrix& X,
                    const Eigen::VectorXd& y, const Weighting& w) {
  return weighted_nll(params.coef_vector(X.column_names), X, y, w);
}

Eigen::VectorXd nll_gradient(const EquationParams& params, const DesignMatrix& X,
                             const Eigen::VectorXd& y, const Weighting& w) {
  return nll_gradient(params.coef_vector(X.column_names), X, y, w);
}

Eigen::MatrixXd nll_hessian(const EquationParams& params, const DesignMatrix& X,
                            const Eigen::VectorXd& y, const Weighting& w) {
  return nll_hessian(params.coef_vector(X.column_names), X, y, w);
}

namespace {

// LLT solve with a single ridge retry. Returns the step and whether the ridge
// was needed; throws NumericError when the matrix stays unfactorizable.
Eigen::VectorXd solve_newton_step(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                                  double ridge, bool& used_ridge) {
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() == Eigen::Success) {
    used_ridge = false;
    return llt.solve(g);
  }
  Eigen::MatrixXd Hr = H;
  Hr.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt2(Hr);
  if (llt2.info() == Eigen::Success) {
    used_ridge = true;
    return llt2.solve(g);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  std::ostringstream msg;
  msg << "singular Hessian in Newton step; eigenvalue range ["
      << es.eigenvalues().minCoeff() << ", " << es.eigenvalues().maxCoeff() << "]";
  throw NumericError(msg.str());
}

}  // namespace

EquationParams fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                   const Weighting& w, const FitOptions& opts) {
  X.validate();
  check_response(X, y);
  const double ybar = y.mean();
  if (ybar == 0.0 || ybar == 1.0)
    throw ValidationError("all-constant response: cannot fit a logistic equation");

  EquationParams out;
  if (X.n() < X.d()) {
    std::ostringstream msg;
    msg << "fewer observations (" << X.n() << ") than parameters (" << X.d() << ")";
    out.warnings.push_back(msg.str());
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(X.d());
  double nll = weighted_nll(theta, X, y, w);
  out.nll_trace.push_back(nll);

  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const Eigen::VectorXd g = nll_gradient(theta, X, y, w);
    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd H = nll_hessian(theta, X, y, w);
    bool used_ridge = false;
    const Eigen::VectorXd step = solve_newton_step(H, g, opts.ridge, used_ridge);
    if (used_ridge)
      out.warnings.push_back("Hessian factorization failed; retried with ridge " +
                             std::to_string(opts.ridge));

    // Step-halving: accept the first candidate that does not increase the
    // objective.
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      const Eigen::VectorXd candidate = theta - t * step;
      const double candidate_nll = weighted_nll(candidate, X, y, w);
      if (candidate_nll <= nll) {
        theta = candidate;
        nll = candidate_nll;
        accepted = true;
        break;
      }
    }
    out.nll_trace.push_back(nll);
    if (!accepted) break;  // stalled: no step length decreases the objective
  }

  if (!converged)
    converged = nll_gradient(theta, X, y, w).lpNorm<Eigen::Infinity>() < opts.grad_tol;

  out.converged = converged;
  out.iterations = iter;
  out.final_nll = nll;
  if (!converged && theta.lpNorm<Eigen::Infinity>() > opts.separation_bound) {
    out.separation_suspected = true;
    out.warnings.push_back(
        "possible complete separation: a coefficient exceeded the bound " +
        std::to_string(opts.separation_bound));
  }
  for (Eigen::Index k = 0; k < theta.size(); ++k)
    out.coefficients[X.column_names[static_cast<std::size_t>(k)]] = theta[k];
  return out;
}

OddsRatio odds_ratio_ci(double coefficient, double standard_error, double level) {
  const double z = normal_quantile_for_level(level);
  OddsRatio orr;
  orr.point = std::exp(coefficient);
  orr.ci_low = std::exp(coefficient - z * standard_error);
  orr.ci_high = std::exp(coefficient + z * standard_error);
  return orr;
}

InferenceStats inference_stats(const EquationParams& params, const DesignMatrix& X,
                               const Eigen::VectorXd& y, const Weighting& w,
                               double level) {
  if (!params.converged)
    throw NumericError("inference_stats requires a converged fit");
  const Eigen::VectorXd theta = params.coef_vector(X.column_names);
  const Eigen::MatrixXd H = nll_hessian(theta, X, y, w);
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success)
    throw NumericError("singular Hessian: covariance is not available");

  InferenceStats stats;
  stats.covariance = llt.solve(Eigen::MatrixXd::Identity(X.d(), X.d()));
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const std::string& name = X.column_names[static_cast<std::size_t>(k)];
    const double se = std::sqrt(stats.covariance(k, k));
    stats.standard_errors[name] = se;
    stats.odds_ratios[name] = odds_ratio_ci(theta[k], se, level);
  }
  return stats;
}

}  // namespace comorbid::glm
