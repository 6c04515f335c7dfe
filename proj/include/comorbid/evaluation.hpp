#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "comorbid/data_io.hpp"
#include "comorbid/glm.hpp"
#include "comorbid/model_spec.hpp"

namespace comorbid {

struct RocCurve {
  // points[i] = (fpr, tpr); first (0,0), last (1,1), both non-decreasing.
  std::vector<std::pair<double, double>> points;
  // thresholds[i] is the score cutoff producing points[i]; thresholds[0] is
  // +infinity. Tied scores enter a single step.
  std::vector<double> thresholds;
  double auc = 0.0;  // trapezoid integral of the points

  // One line per point: `threshold,fpr,tpr`.
  std::string to_csv() const;
};

// Labels must contain at least one 0 and one 1.
RocCurve roc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

// (#concordant + 0.5 #tied) / (#pos * #neg) over all pos-neg pairs.
// Independent oracle for roc().auc; kept as a direct pair count.
double auc_mann_whitney(const Eigen::VectorXd& scores,
                        const Eigen::VectorXd& labels);

enum class EvalMethod { in_sample, bootstrap, jackknife };

struct MethodSpec {
  EvalMethod method = EvalMethod::in_sample;
  glm::WeightingPolicy weighting = glm::WeightingPolicy::none;

  // Column names follow the published table: "weight", "boot+weight",
  // "boot", "jackkn+weight", "jackkn"; plain in-sample is "plain".
  std::string name() const;
  bool operator==(const MethodSpec&) const = default;
};

MethodSpec method_from_name(const std::string& name);
std::vector<MethodSpec> default_methods();

struct ReplicateResult {
  bool ok = false;
  std::string failure;  // non-empty when !ok
  glm::EquationParams params;
  RocCurve roc;
};

// Fit the misspecified equation for `equation` on the given training rows and
// score the given test rows. Shared by all resampling schemes.
ReplicateResult eval_split(const NetworkSpec& spec, const Dataset& data,
                           const std::string& equation,
                           glm::WeightingPolicy weighting,
                           const std::vector<Eigen::Index>& train_rows,
                           const std::vector<Eigen::Index>& test_rows,
                           const glm::FitOptions& opts = {});

// Fit on the full sample, score the full sample.
ReplicateResult in_sample_eval(const NetworkSpec& spec, const Dataset& data,
                               const std::string& equation,
                               glm::WeightingPolicy weighting,
                               const glm::FitOptions& opts = {});

// Per replicate: resample n rows with replacement, fit on the resample,
// score the full original sample. Failed replicates are recorded, never fatal.
std::vector<ReplicateResult> bootstrap_eval(const NetworkSpec& spec,
                                            const Dataset& data,
                                            const std::string& equation,
                                            glm::WeightingPolicy weighting,
                                            int replicates, std::uint64_t seed,
                                            const glm::FitOptions& opts = {});

// Per repeat: uniform random holdout without replacement of size
// round(n * holdout_fraction); fit on the remainder, score the holdout.
std::vector<ReplicateResult> jackknife_eval(const NetworkSpec& spec,
                                            const Dataset& data,
                                            const std::string& equation,
                                            glm::WeightingPolicy weighting,
                                            double holdout_fraction, int repeats,
                                            std::uint64_t seed,
                                            const glm::FitOptions& opts = {});

// True k-fold alternative: one shuffled partition, each fold tested once.
std::vector<ReplicateResult> kfold_eval(const NetworkSpec& spec,
                                        const Dataset& data,
                                        const std::string& equation,
                                        glm::WeightingPolicy weighting,
                                        int folds, std::uint64_t seed,
                                        const glm::FitOptions& opts = {});

struct EvalCell {
  std::vector<double> aucs;  // successful replicates, replicate order
  int failures = 0;
  double mean_auc = 0.0;
  std::vector<ReplicateResult> replicates;  // full per-replicate detail
};

struct EvalOptions {
  int replicates = 20;
  double holdout_fraction = 0.10;
  int folds = 0;  // 0 = repeated random holdout, >0 = k-fold
  std::uint64_t seed = 0;
  // Equations to evaluate; empty selects every disease with symptom inputs.
  std::vector<std::string> equations;
  glm::FitOptions fit;
};

struct EvalReport {
  std::vector<std::string> equations;
  std::vector<MethodSpec> methods;
  std::map<std::string, std::map<std::string, EvalCell>> cells;  // eq -> method name
  EvalOptions options;

  // Published-table layout: `equation,<method columns>`, mean AUC to 4 dp.
  std::string to_table_csv() const;
  // Machine-readable twin with per-replicate AUCs and failure counts.
  std::string to_json() const;
};

EvalReport eval_report(const NetworkSpec& spec, const Dataset& data,
                       const std::vector<MethodSpec>& methods,
                       const EvalOptions& options);

// One `<equation>_<method>_r<idx>.csv` per replicate under dir.
void write_roc_files(const EvalReport& report, const std::string& dir);

}  // namespace comorbid
