#include "comorbid/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "comorbid/errors.hpp"
#include "comorbid/rng.hpp"

namespace comorbid {

namespace {

using nlohmann::ordered_json;

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_roc_inputs(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  if (scores.size() != labels.size())
    throw ValidationError("scores and labels must have equal length");
  if (scores.size() == 0) throw ValidationError("empty score vector");
  bool any0 = false, any1 = false;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0.0)
      any0 = true;
    else if (labels[i] == 1.0)
      any1 = true;
    else
      throw ValidationError("labels must be 0 or 1");
  }
  if (!any0 || !any1)
    throw ValidationError("degenerate labels: need at least one 0 and one 1");
}

// Sub-seeds per resampling family so bootstrap and jackknife replicate
// streams never overlap; equations and weightings share them, which pairs
// the resamples across the report's columns.
constexpr std::uint64_t kBootstrapTag = 1;
constexpr std::uint64_t kJackknifeTag = 2;
constexpr std::uint64_t kFoldTag = 3;

}  // namespace

RocCurve roc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  check_roc_inputs(scores, labels);
  const Eigen::Index n = scores.size();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return scores[a] > scores[b];  // decreasing score
  });

  double n_pos = 0, n_neg = 0;
  for (Eigen::Index i = 0; i < n; ++i) (labels[i] == 1.0 ? n_pos : n_neg) += 1.0;

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());

  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double cutoff = scores[order[i]];
    // consume the whole tie group at this score
    while (i < order.size() && scores[order[i]] == cutoff) {
      (labels[order[i]] == 1.0 ? tp : fp) += 1.0;
      ++i;
    }
    curve.points.emplace_back(fp / n_neg, tp / n_pos);
    curve.thresholds.push_back(cutoff);
  }

  double auc = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& [x0, y0] = curve.points[k - 1];
    const auto& [x1, y1] = curve.points[k];
    auc += (x1 - x0) * (y0 + y1) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

double auc_mann_whitney(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  check_roc_inputs(scores, labels);
  // direct pair count, independent of the ROC construction
  double concordant = 0.0, tied = 0.0, n_pos = 0.0, n_neg = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0) continue;
    n_pos += 1.0;
    for (Eigen::Index j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0.0) continue;
      if (scores[i] > scores[j])
        concordant += 1.0;
      else if (scores[i] == scores[j])
        tied += 1.0;
    }
  }
  for (Eigen::Index j = 0; j < labels.size(); ++j)
    if (labels[j] == 0.0) n_neg += 1.0;
  return (concordant + 0.5 * tied) / (n_pos * n_neg);
}

std::string RocCurve::to_csv() const {
  std::string out = "threshold,fpr,tpr\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    out += format_full(thresholds[k]) + "," + format_full(points[k].first) + "," +
           format_full(points[k].second) + "\n";
  }
  return out;
}

std::string MethodSpec::name() const {
  const bool weighted = weighting == glm::WeightingPolicy::rare_event;
  switch (method) {
    case EvalMethod::in_sample:
      return weighted ? "weight" : "plain";
    case EvalMethod::bootstrap:
      return weighted ? "boot+weight" : "boot";
    case EvalMethod::jackknife:
      return weighted ? "jackkn+weight" : "jackkn";
  }
  return "?";
}

MethodSpec method_from_name(const std::string& name) {
  static const std::vector<MethodSpec> all = {
      {EvalMethod::in_sample, glm::WeightingPolicy::rare_event},
      {EvalMethod::in_sample, glm::WeightingPolicy::none},
      {EvalMethod::bootstrap, glm::WeightingPolicy::rare_event},
      {EvalMethod::bootstrap, glm::WeightingPolicy::none},
      {EvalMethod::jackknife, glm::WeightingPolicy::rare_event},
      {EvalMethod::jackknife, glm::WeightingPolicy::none},
  };
  for (const auto& m : all)
    if (m.name() == name) return m;
  throw ValidationError("unknown evaluation method '" + name +
                        "' (expected weight, plain, boot+weight, boot, jackkn+weight or jackkn)");
}

std::vector<MethodSpec> default_methods() {
  return {
      {EvalMethod::in_sample, glm::WeightingPolicy::rare_event},
      {EvalMethod::bootstrap, glm::WeightingPolicy::rare_event},
      {EvalMethod::bootstrap, glm::WeightingPolicy::none},
      {EvalMethod::jackknife, glm::WeightingPolicy::rare_event},
      {EvalMethod::jackknife, glm::WeightingPolicy::none},
  };
}

namespace {

struct EquationData {
  glm::DesignMatrix X;
  Eigen::VectorXd y;
};

EquationData equation_data(const NetworkSpec& spec, const Dataset& data,
                           const std::string& equation) {
  EquationData out;
  out.X = build_design(data, design_columns(spec, equation, EquationVariant::misspecified));
  out.y = data.column_as_double(equation);
  return out;
}

glm::DesignMatrix select_rows(const glm::DesignMatrix& X,
                              const std::vector<Eigen::Index>& rows) {
  glm::DesignMatrix out;
  out.column_names = X.column_names;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), X.values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.values.row(i) = X.values.row(rows[i]);
  return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& y,
                            const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[rows[i]];
  return out;
}

ReplicateResult eval_split_impl(const EquationData& eq, double tau_or_nan,
                                glm::WeightingPolicy weighting,
                                const std::vector<Eigen::Index>& train_rows,
                                const std::vector<Eigen::Index>& test_rows,
                                const glm::FitOptions& opts) {
  ReplicateResult result;
  try {
    const glm::DesignMatrix X_train = select_rows(eq.X, train_rows);
    const Eigen::VectorXd y_train = select_rows(eq.y, train_rows);
    glm::Weighting w;
    if (weighting == glm::WeightingPolicy::rare_event) {
      if (std::isnan(tau_or_nan))
        throw ValidationError("rare-event weighting requires tau for the evaluated equation");
      w = glm::rare_event_weights(tau_or_nan, y_train);
    }
    result.params = glm::fit(X_train, y_train, w, opts);

    const glm::DesignMatrix X_test = select_rows(eq.X, test_rows);
    const Eigen::VectorXd y_test = select_rows(eq.y, test_rows);
    const Eigen::VectorXd theta = result.params.coef_vector(X_test.column_names);
    Eigen::VectorXd scores = X_test.values * theta;
    scores = scores.unaryExpr([](double t) { return glm::sigmoid(t); });
    result.roc = roc(scores, y_test);
    result.ok = true;
  } catch (const std::exception& e) {
    result.ok = false;
    result.failure = e.what();
  }
  return result;
}

double tau_for(const NetworkSpec& spec, const std::string& equation,
               glm::WeightingPolicy weighting) {
  if (weighting != glm::WeightingPolicy::rare_event)
    return std::numeric_limits<double>::quiet_NaN();
  auto it = spec.tau.find(equation);
  if (it == spec.tau.end())
    throw ValidationError("rare-event weighting requires tau for disease '" + equation +
                          "' but the spec does not declare it");
  return it->second;
}

std::vector<Eigen::Index> all_rows(Eigen::Index n) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return rows;
}

}  // namespace

ReplicateResult eval_split(const NetworkSpec& spec, const Dataset& data,
                           const std::string& equation, glm::WeightingPolicy weighting,
                           const std::vector<Eigen::Index>& train_rows,
                           const std::vector<Eigen::Index>& test_rows,
                           const glm::FitOptions& opts) {
  const EquationData eq = equation_data(spec, data, equation);
  return eval_split_impl(eq, tau_for(spec, equation, weighting), weighting, train_rows,
                         test_rows, opts);
}

ReplicateResult in_sample_eval(const NetworkSpec& spec, const Dataset& data,
                               const std::string& equation,
                               glm::WeightingPolicy weighting,
                               const glm::FitOptions& opts) {
  const auto rows = all_rows(data.n());
  return eval_split(spec, data, equation, weighting, rows, rows, opts);
}

std::vector<ReplicateResult> bootstrap_eval(const NetworkSpec& spec, const Dataset& data,
                                            const std::string& equation,
                                            glm::WeightingPolicy weighting, int replicates,
                                            std::uint64_t seed,
                                            const glm::FitOptions& opts) {
  if (replicates < 1) throw ValidationError("bootstrap needs at least one replicate");
  const EquationData eq = equation_data(spec, data, equation);
  const double tau = tau_for(spec, equation, weighting);
  const Eigen::Index n = data.n();
  const auto full = all_rows(n);

  std::vector<ReplicateResult> results;
  results.reserve(static_cast<std::size_t>(replicates));
  for (int r = 0; r < replicates; ++r) {
    SplitMix64 rng = derive_stream(mix64(seed + kBootstrapTag), static_cast<std::uint64_t>(r));
    std::vector<Eigen::Index> resample(static_cast<std::size_t>(n));
    for (auto& idx : resample)
      idx = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    results.push_back(eval_split_impl(eq, tau, weighting, resample, full, opts));
  }
  return results;
}

std::vector<ReplicateResult> jackknife_eval(const NetworkSpec& spec, const Dataset& data,
                                            const std::string& equation,
                                            glm::WeightingPolicy weighting,
                                            double holdout_fraction, int repeats,
                                            std::uint64_t seed,
                                            const glm::FitOptions& opts) {
  if (repeats < 1) throw ValidationError("jackknife needs at least one repeat");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw ValidationError("holdout fraction must lie strictly in (0,1)");
  const Eigen::Index n = data.n();
  const auto k = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * holdout_fraction));
  if (static_cast<double>(n) * holdout_fraction < 10.0)
    throw ValidationError("holdout would contain fewer than 10 observations");

  const EquationData eq = equation_data(spec, data, equation);
  const double tau = tau_for(spec, equation, weighting);

  std::vector<ReplicateResult> results;
  results.reserve(static_cast<std::size_t>(repeats));
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (int r = 0; r < repeats; ++r) {
    SplitMix64 rng = derive_stream(mix64(seed + kJackknifeTag), static_cast<std::uint64_t>(r));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    // partial Fisher-Yates: the first k entries become the holdout
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto j = i + static_cast<Eigen::Index>(
                             rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    std::vector<Eigen::Index> test(perm.begin(), perm.begin() + k);
    std::vector<Eigen::Index> train(perm.begin() + k, perm.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    results.push_back(eval_split_impl(eq, tau, weighting, train, test, opts));
  }
  return results;
}

std::vector<ReplicateResult> kfold_eval(const NetworkSpec& spec, const Dataset& data,
                                        const std::string& equation,
                                        glm::WeightingPolicy weighting, int folds,
                                        std::uint64_t seed, const glm::FitOptions& opts) {
  const Eigen::Index n = data.n();
  if (folds < 2 || static_cast<Eigen::Index>(folds) > n)
    throw ValidationError("fold count must lie between 2 and n");
  const EquationData eq = equation_data(spec, data, equation);
  const double tau = tau_for(spec, equation, weighting);

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  SplitMix64 rng = derive_stream(mix64(seed + kFoldTag), 0);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }

  std::vector<ReplicateResult> results;
  results.reserve(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    const auto lo = static_cast<std::size_t>(n) * static_cast<std::size_t>(f) /
                    static_cast<std::size_t>(folds);
    const auto hi = static_cast<std::size_t>(n) * static_cast<std::size_t>(f + 1) /
                    static_cast<std::size_t>(folds);
    std::vector<Eigen::Index> test(perm.begin() + static_cast<std::ptrdiff_t>(lo),
                                   perm.begin() + static_cast<std::ptrdiff_t>(hi));
    std::vector<Eigen::Index> train;
    train.reserve(static_cast<std::size_t>(n) - (hi - lo));
    train.insert(train.end(), perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(lo));
    train.insert(train.end(), perm.begin() + static_cast<std::ptrdiff_t>(hi), perm.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    results.push_back(eval_split_impl(eq, tau, weighting, train, test, opts));
  }
  return results;
}

namespace {

EvalCell summarize(std::vector<ReplicateResult> replicates) {
  EvalCell cell;
  for (const auto& rep : replicates) {
    if (rep.ok)
      cell.aucs.push_back(rep.roc.auc);
    else
      ++cell.failures;
  }
  cell.mean_auc = cell.aucs.empty()
                      ? std::numeric_limits<double>::quiet_NaN()
                      : std::accumulate(cell.aucs.begin(), cell.aucs.end(), 0.0) /
                            static_cast<double>(cell.aucs.size());
  cell.replicates = std::move(replicates);
  return cell;
}

// Canonical column order follows the published table.
const std::vector<std::string> kMethodOrder = {"weight",        "boot+weight", "boot",
                                               "jackkn+weight", "jackkn",      "plain"};

std::vector<MethodSpec> canonical_order(std::vector<MethodSpec> methods) {
  std::stable_sort(methods.begin(), methods.end(), [](const MethodSpec& a, const MethodSpec& b) {
    const auto pos = [](const MethodSpec& m) {
      return std::find(kMethodOrder.begin(), kMethodOrder.end(), m.name()) -
             kMethodOrder.begin();
    };
    return pos(a) < pos(b);
  });
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
  return methods;
}

}  // namespace

EvalReport eval_report(const NetworkSpec& spec, const Dataset& data,
                       const std::vector<MethodSpec>& methods, const EvalOptions& options) {
  if (methods.empty()) throw ValidationError("at least one evaluation method is required");
  validate_structure(spec);
  const ParentSets parents = validate_dag(spec);

  EvalReport report;
  report.methods = canonical_order(methods);
  report.options = options;

  if (!options.equations.empty()) {
    for (const auto& eq : options.equations)
      if (std::find(spec.diseases.begin(), spec.diseases.end(), eq) == spec.diseases.end())
        throw ValidationError("evaluation equation '" + eq + "' is not a declared disease");
    report.equations = options.equations;
  } else {
    // default: the diseases whose misspecified equation uses symptom inputs
    for (const auto& d : spec.diseases)
      if (!parents.symptom_inputs_mis.at(d).empty()) report.equations.push_back(d);
  }
  if (report.equations.empty())
    throw ValidationError("no equations to evaluate: no disease has symptom inputs");

  for (const auto& equation : report.equations) {
    for (const auto& method : report.methods) {
      std::vector<ReplicateResult> reps;
      switch (method.method) {
        case EvalMethod::in_sample:
          reps.push_back(in_sample_eval(spec, data, equation, method.weighting, options.fit));
          break;
        case EvalMethod::bootstrap:
          reps = bootstrap_eval(spec, data, equation, method.weighting, options.replicates,
                                options.seed, options.fit);
          break;
        case EvalMethod::jackknife:
          if (options.folds > 0)
            reps = kfold_eval(spec, data, equation, method.weighting, options.folds,
                              options.seed, options.fit);
          else
            reps = jackknife_eval(spec, data, equation, method.weighting,
                                  options.holdout_fraction, options.replicates, options.seed,
                                  options.fit);
          break;
      }
      report.cells[equation][method.name()] = summarize(std::move(reps));
    }
  }
  return report;
}

std::string EvalReport::to_table_csv() const {
  std::string out = "equation";
  for (const auto& method : methods) out += "," + method.name();
  out += "\n";
  for (const auto& equation : equations) {
    out += equation;
    for (const auto& method : methods) {
      const EvalCell& cell = cells.at(equation).at(method.name());
      char buf[32];
      if (std::isnan(cell.mean_auc))
        std::snprintf(buf, sizeof(buf), "NA");
      else
        std::snprintf(buf, sizeof(buf), "%.4f", cell.mean_auc);
      out += std::string(",") + buf;
    }
    out += "\n";
  }
  return out;
}

std::string EvalReport::to_json() const {
  ordered_json doc;
  doc["seed"] = options.seed;
  doc["replicates"] = options.replicates;
  doc["holdout_fraction"] = options.holdout_fraction;
  doc["folds"] = options.folds;
  ordered_json methods_json = ordered_json::array();
  for (const auto& method : methods) methods_json.push_back(method.name());
  doc["methods"] = methods_json;
  ordered_json equations_json = ordered_json::object();
  for (const auto& equation : equations) {
    ordered_json eq_json = ordered_json::object();
    for (const auto& method : methods) {
      const EvalCell& cell = cells.at(equation).at(method.name());
      ordered_json cell_json;
      cell_json["aucs"] = cell.aucs;
      if (std::isnan(cell.mean_auc))
        cell_json["mean"] = nullptr;
      else
        cell_json["mean"] = cell.mean_auc;
      cell_json["failures"] = cell.failures;
      eq_json[method.name()] = cell_json;
    }
    equations_json[equation] = eq_json;
  }
  doc["equations"] = equations_json;
  return doc.dump(2) + "\n";
}

void write_roc_files(const EvalReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& equation : report.equations) {
    for (const auto& method : report.methods) {
      const EvalCell& cell = report.cells.at(equation).at(method.name());
      for (std::size_t r = 0; r < cell.replicates.size(); ++r) {
        const auto& rep = cell.replicates[r];
        if (!rep.ok) continue;
        const std::string path =
            dir + "/" + equation + "_" + method.name() + "_r" + std::to_string(r) + ".csv";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write ROC file '" + path + "'");
        out << rep.roc.to_csv();
        if (!out) throw IoError("failed writing ROC file '" + path + "'");
      }
    }
  }
}

}  // namespace comorbid
