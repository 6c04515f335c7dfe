#pragma once

#include <string>
#include <vector>

#include "comorbid/generative.hpp"

namespace comorbid {

// The misspecified variant: one logistic equation per disease with the
// symptom edges reversed (symptoms enter as predictors). Diagnostic
// probabilities are single closed-form evaluations.
class MisspecifiedModel {
 public:
  MisspecifiedModel(NetworkSpec spec,
                    std::map<std::string, glm::EquationParams> disease_eqs);

  const NetworkSpec& spec() const { return spec_; }
  const ParentSets& parents() const { return parents_; }
  const std::map<std::string, glm::EquationParams>& disease_eqs() const {
    return disease_eqs_;
  }

  ParamsDocument to_document() const;

 private:
  NetworkSpec spec_;
  ParentSets parents_;
  std::map<std::string, glm::EquationParams> disease_eqs_;
};

MisspecifiedModel make_misspecified_model(const NetworkSpec& spec,
                                          const ParamsDocument& doc);

// p independent logistic fits; rare-event weighting per tau_i when requested.
MisspecifiedModel fit_misspecified(const NetworkSpec& spec, const Dataset& data,
                                   glm::WeightingPolicy policy,
                                   const glm::FitOptions& opts = {});

// sigmoid of the misspecified linear predictor. The condition must assign
// every disease parent and every symptom input of the target; covariates and
// factors come from the scenario. Entries for other variables are ignored.
double diagnostic_prob(const MisspecifiedModel& model, const Scenario& scenario,
                       const std::string& target, const Assignment& condition);

struct Query {
  std::string target;
  Assignment condition;

  bool operator==(const Query&) const = default;
};

// "P(Y1=1|Y2=0,Y3=0,Y4=0,S1=1)" with condition keys in declaration order.
std::string query_label(const NetworkSpec& spec, const Query& query);

// The paper-style query set for one scenario: for each disease with symptom
// inputs, all parents at 0 and all parents at 1, symptom inputs taken from
// the scenario's symptom values.
std::vector<Query> default_queries(const NetworkSpec& spec,
                                   const ParentSets& parents,
                                   const Scenario& scenario);

struct ComparisonRow {
  std::string scenario;
  std::string query;
  double exact = 0.0;
  double misspecified = 0.0;
  double abs_diff = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  double max_abs_diff() const;
  // Header `scenario,query,exact,misspecified,abs_diff`, full precision.
  std::string to_csv() const;
  // Three-decimal text table for terminal output.
  std::string to_text() const;
};

// Scenario-major evaluation of the fixed query list on both engines.
ComparisonTable compare_models(const GenerativeModel& gen,
                               const MisspecifiedModel& mis,
                               const std::vector<NamedScenario>& scenarios,
                               const std::vector<Query>& queries);

// Same, but queries are regenerated per scenario via default_queries.
ComparisonTable compare_models_default(const GenerativeModel& gen,
                                       const MisspecifiedModel& mis,
                                       const std::vector<NamedScenario>& scenarios);

}  // namespace comorbid
