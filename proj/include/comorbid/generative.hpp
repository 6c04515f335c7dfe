#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "comorbid/data_io.hpp"
#include "comorbid/glm.hpp"
#include "comorbid/model_spec.hpp"
#include "comorbid/params_io.hpp"

namespace comorbid {

namespace detail {
struct CompiledModel;  // internal indexed form, see generative.cpp
}

// Partial or full 0/1 assignment of diseases and/or symptoms by name.
using Assignment = std::map<std::string, int>;

// Free-variable count above which exact enumeration refuses to run.
inline constexpr int kMaxEnumerationBits = 22;

// The generative Bayesian network: one logistic equation per disease
// (parents, covariates, factors) and per symptom (disease parents,
// covariates, factors). Immutable after construction.
class GenerativeModel {
 public:
  GenerativeModel(NetworkSpec spec,
                  std::map<std::string, glm::EquationParams> disease_eqs,
                  std::map<std::string, glm::EquationParams> symptom_eqs);

  const NetworkSpec& spec() const { return spec_; }
  const ParentSets& parents() const { return parents_; }
  const std::map<std::string, glm::EquationParams>& disease_eqs() const {
    return disease_eqs_;
  }
  const std::map<std::string, glm::EquationParams>& symptom_eqs() const {
    return symptom_eqs_;
  }

  ParamsDocument to_document() const;

  // Cached indexed form used by the enumeration and sampling hot paths.
  const detail::CompiledModel& compiled() const { return *compiled_; }

 private:
  NetworkSpec spec_;
  ParentSets parents_;
  std::map<std::string, glm::EquationParams> disease_eqs_;
  std::map<std::string, glm::EquationParams> symptom_eqs_;
  std::shared_ptr<const detail::CompiledModel> compiled_;
};

GenerativeModel make_generative_model(const NetworkSpec& spec,
                                      const ParamsDocument& doc);

// log P(Y = y, S = s | F, X) — sum of per-factor log Bernoulli terms.
// y must assign every disease and s every symptom.
double joint_log_prob(const GenerativeModel& model, const Assignment& diseases,
                      const Assignment& symptoms, const Scenario& scenario);

// Ancestral sampling: diseases in topological order, then symptoms. The
// scenario fixes F and X for every row. Row i's draws come from substream i
// of the seed, so prefixes are stable under changes of n.
Dataset sample(const GenerativeModel& model, const Scenario& scenario,
               std::int64_t n, std::uint64_t seed);

// Same, but F and X are drawn independently Bernoulli(fx_prob) per row.
Dataset sample_random_fx(const GenerativeModel& model, double fx_prob,
                         std::int64_t n, std::uint64_t seed);

// Fits the p disease equations and m symptom equations independently.
// Rare-event weighting applies the spec's tau_i per disease and fails fast
// if tau is missing for any disease; symptom equations are never weighted.
GenerativeModel fit_generative(const NetworkSpec& spec, const Dataset& data,
                               glm::WeightingPolicy policy,
                               const glm::FitOptions& opts = {});

// P(target = 1 | condition, F, X) by exact enumeration over the free
// diseases/symptoms; symptoms absent from the condition are marginalized.
// Throws CapacityError when the free-state count exceeds 2^kMaxEnumerationBits
// and NumericError when the condition has numerically zero probability.
double exact_conditional(const GenerativeModel& model, const Scenario& scenario,
                         const std::string& target, const Assignment& condition);

}  // namespace comorbid
