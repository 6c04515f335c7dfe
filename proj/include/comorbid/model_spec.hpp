#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace comorbid {

// Name of the constant-one design column present in every equation.
inline constexpr const char* kInterceptColumn = "intercept";

// Declares the network structure: a DAG over diseases, a bipartite
// disease->symptom graph (stored in the generative direction only; the
// symptom->disease direction is always derived by reversal), common factors,
// covariates and optional per-disease population fractions tau.
struct NetworkSpec {
  std::vector<std::string> diseases;
  std::vector<std::string> symptoms;
  std::vector<std::string> factors;
  std::vector<std::string> covariates;
  std::vector<std::pair<std::string, std::string>> disease_edges;  // parent -> child
  std::vector<std::pair<std::string, std::string>> symptom_edges;  // disease -> symptom
  std::map<std::string, double> tau;  // disease -> population fraction, optional

  bool operator==(const NetworkSpec&) const = default;
};

// Parent lists per equation, all ordered by declaration order in the spec.
struct ParentSets {
  std::map<std::string, std::vector<std::string>> disease_parents;
  std::map<std::string, std::vector<std::string>> symptom_parents_gen;  // symptom -> diseases
  std::map<std::string, std::vector<std::string>> symptom_inputs_mis;   // disease -> symptoms
  std::vector<std::string> topo_order;
};

enum class EquationVariant { generative_disease, generative_symptom, misspecified };

// One setting of the conditioning variables for queries and simulation.
// Covariates/factors must be fully assigned before generative queries or
// sampling; symptoms and disease conditions are optional.
struct Scenario {
  std::map<std::string, int> covariate_values;
  std::map<std::string, int> factor_values;
  std::map<std::string, int> symptom_values;
  std::map<std::string, int> disease_conditions;

  bool operator==(const Scenario&) const = default;
};

using NamedScenario = std::pair<std::string, Scenario>;

// Parses a JSON spec document and runs the full set of structural checks
// (unique names, edge endpoints, tau range, acyclicity). Unknown top-level
// keys are rejected. Throws ValidationError.
NetworkSpec parse_spec(const std::string& text);

// Structural checks without the parse step; parse_spec calls this.
void validate_structure(const NetworkSpec& spec);

// Cycle check plus derived parent sets and a topological order of the
// diseases. Fails if and only if disease_edges contain a cycle; the error
// message lists one offending cycle.
ParentSets validate_dag(const NetworkSpec& spec);

// Ordered predictor column list for one equation:
//   generative_disease:  intercept, disease parents, covariates, factors
//   misspecified:        intercept, disease parents, symptom inputs,
//                        covariates, factors
//   generative_symptom:  intercept, disease parents of the symptom,
//                        covariates, factors
// Within each block the order is declaration order in the spec.
std::vector<std::string> design_columns(const NetworkSpec& spec,
                                        const std::string& equation,
                                        EquationVariant variant);

std::string serialize_spec(const NetworkSpec& spec);
NetworkSpec read_spec(const std::string& path);
void write_spec(const NetworkSpec& spec, const std::string& path);

}  // namespace comorbid
