#include "comorbid/generative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "comorbid/errors.hpp"
#include "comorbid/rng.hpp"

namespace comorbid {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

namespace detail {

// Slot layout for the flat state vector used by enumeration and sampling:
// diseases, symptoms, factors, covariates, each in declaration order.
struct SlotMap {
  std::map<std::string, int> slot;
  int p = 0, m = 0, l = 0, r = 0;

  explicit SlotMap(const NetworkSpec& spec) {
    int next = 0;
    for (const auto& n : spec.diseases) slot[n] = next++;
    p = next;
    for (const auto& n : spec.symptoms) slot[n] = next++;
    m = next - p;
    for (const auto& n : spec.factors) slot[n] = next++;
    l = next - p - m;
    for (const auto& n : spec.covariates) slot[n] = next++;
    r = next - p - m - l;
  }

  int size() const { return p + m + l + r; }
};

struct CompiledEquation {
  int response = -1;
  double intercept = 0.0;
  std::vector<std::pair<int, double>> terms;  // (slot, coefficient)

  double linear_predictor(const std::vector<double>& state) const {
    double lp = intercept;
    for (const auto& [slot, coef] : terms) lp += coef * state[slot];
    return lp;
  }

  double log_prob(const std::vector<double>& state) const {
    const double lp = linear_predictor(state);
    return state[response] == 1.0 ? glm::log_sigmoid(lp) : glm::log_sigmoid(-lp);
  }
};

struct CompiledModel {
  SlotMap slots;
  std::vector<CompiledEquation> equations;  // disease eqs (decl order), then symptom eqs
  std::vector<int> disease_topo_slots;
  std::vector<const CompiledEquation*> eq_by_slot;

  CompiledModel(const NetworkSpec& spec, const ParentSets& parents,
                const std::map<std::string, glm::EquationParams>& disease_eqs,
                const std::map<std::string, glm::EquationParams>& symptom_eqs);

  double joint_log_prob(const std::vector<double>& state) const {
    double total = 0.0;
    for (const auto& eq : equations) total += eq.log_prob(state);
    return total;
  }
};

}  // namespace detail

namespace {

using detail::CompiledEquation;
using detail::CompiledModel;
using detail::SlotMap;

CompiledEquation compile_equation(const NetworkSpec& spec, const SlotMap& slots,
                                  const std::string& name, EquationVariant variant,
                                  const glm::EquationParams& params) {
  const auto columns = design_columns(spec, name, variant);
  if (params.coefficients.size() != columns.size()) {
    std::ostringstream msg;
    msg << "equation '" << name << "' has " << params.coefficients.size()
        << " coefficients, expected " << columns.size();
    throw ValidationError(msg.str());
  }
  CompiledEquation eq;
  eq.response = slots.slot.at(name);
  for (const auto& column : columns) {
    auto it = params.coefficients.find(column);
    if (it == params.coefficients.end())
      throw ValidationError("equation '" + name + "' is missing coefficient '" + column + "'");
    if (!std::isfinite(it->second))
      throw ValidationError("equation '" + name + "' has a non-finite coefficient '" +
                            column + "'");
    if (column == kInterceptColumn)
      eq.intercept = it->second;
    else
      eq.terms.emplace_back(slots.slot.at(column), it->second);
  }
  return eq;
}

// Streaming log-sum-exp with a running max shift.
class LogSumExp {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x > max_) {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    } else {
      sum_ += std::exp(x - max_);
    }
  }

  double value() const { return sum_ == 0.0 ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

void fill_scenario(const NetworkSpec& spec, const SlotMap& slots,
                   const Scenario& scenario, std::vector<double>& state) {
  auto fill_group = [&](const std::vector<std::string>& names,
                        const std::map<std::string, int>& values, const char* what) {
    for (const auto& name : names) {
      auto it = values.find(name);
      if (it == values.end())
        throw ValidationError(std::string("scenario does not set ") + what + " '" + name + "'");
      state[slots.slot.at(name)] = static_cast<double>(it->second);
    }
  };
  fill_group(spec.factors, scenario.factor_values, "factor");
  fill_group(spec.covariates, scenario.covariate_values, "covariate");
}

void check_assignment_known(const NetworkSpec& spec, const Assignment& assignment,
                            const char* what) {
  for (const auto& [name, value] : assignment) {
    const bool is_disease = std::find(spec.diseases.begin(), spec.diseases.end(), name) !=
                            spec.diseases.end();
    const bool is_symptom = std::find(spec.symptoms.begin(), spec.symptoms.end(), name) !=
                            spec.symptoms.end();
    if (!is_disease && !is_symptom)
      throw ValidationError(std::string("unknown variable '") + name + "' in " + what);
    if (value != 0 && value != 1)
      throw ValidationError(std::string("value for '") + name + "' in " + what +
                            " must be 0 or 1");
  }
}

}  // namespace

namespace detail {

CompiledModel::CompiledModel(const NetworkSpec& spec, const ParentSets& parents,
                             const std::map<std::string, glm::EquationParams>& disease_eqs,
                             const std::map<std::string, glm::EquationParams>& symptom_eqs)
    : slots(spec) {
  equations.reserve(spec.diseases.size() + spec.symptoms.size());
  for (const auto& d : spec.diseases)
    equations.push_back(compile_equation(spec, slots, d,
                                         EquationVariant::generative_disease,
                                         disease_eqs.at(d)));
  for (const auto& s : spec.symptoms)
    equations.push_back(compile_equation(spec, slots, s,
                                         EquationVariant::generative_symptom,
                                         symptom_eqs.at(s)));
  for (const auto& d : parents.topo_order)
    disease_topo_slots.push_back(slots.slot.at(d));
  eq_by_slot.assign(slots.size(), nullptr);
  for (const auto& eq : equations) eq_by_slot[eq.response] = &eq;
}

}  // namespace detail

GenerativeModel::GenerativeModel(NetworkSpec spec,
                                 std::map<std::string, glm::EquationParams> disease_eqs,
                                 std::map<std::string, glm::EquationParams> symptom_eqs)
    : spec_(std::move(spec)),
      disease_eqs_(std::move(disease_eqs)),
      symptom_eqs_(std::move(symptom_eqs)) {
  validate_structure(spec_);
  parents_ = validate_dag(spec_);

  for (const auto& d : spec_.diseases)
    if (!disease_eqs_.count(d))
      throw ValidationError("generative model is missing the equation for disease '" + d + "'");
  for (const auto& s : spec_.symptoms)
    if (!symptom_eqs_.count(s))
      throw ValidationError("generative model is missing the equation for symptom '" + s + "'");
  if (disease_eqs_.size() != spec_.diseases.size())
    throw ValidationError("generative model has equations for undeclared diseases");
  if (symptom_eqs_.size() != spec_.symptoms.size())
    throw ValidationError("generative model has equations for undeclared symptoms");

  // compiling validates every coefficient key against its design columns
  compiled_ = std::make_shared<const detail::CompiledModel>(spec_, parents_, disease_eqs_,
                                                            symptom_eqs_);
}

ParamsDocument GenerativeModel::to_document() const {
  ParamsDocument doc;
  doc.variant = ModelVariant::generative;
  doc.equations = disease_eqs_;
  for (const auto& [name, eq] : symptom_eqs_) doc.equations[name] = eq;
  return doc;
}

GenerativeModel make_generative_model(const NetworkSpec& spec,
                                      const ParamsDocument& doc) {
  if (doc.variant != ModelVariant::generative)
    throw ValidationError("params document has variant '" + to_string(doc.variant) +
                          "', expected 'generative'");
  std::map<std::string, glm::EquationParams> disease_eqs;
  std::map<std::string, glm::EquationParams> symptom_eqs;
  for (const auto& [name, eq] : doc.equations) {
    if (std::find(spec.diseases.begin(), spec.diseases.end(), name) != spec.diseases.end())
      disease_eqs[name] = eq;
    else if (std::find(spec.symptoms.begin(), spec.symptoms.end(), name) != spec.symptoms.end())
      symptom_eqs[name] = eq;
    else
      throw ValidationError("params equation '" + name + "' names no declared disease or symptom");
  }
  return GenerativeModel(spec, std::move(disease_eqs), std::move(symptom_eqs));
}

double joint_log_prob(const GenerativeModel& model, const Assignment& diseases,
                      const Assignment& symptoms, const Scenario& scenario) {
  const NetworkSpec& spec = model.spec();
  check_assignment_known(spec, diseases, "disease assignment");
  check_assignment_known(spec, symptoms, "symptom assignment");

  const CompiledModel& compiled = model.compiled();
  std::vector<double> state(compiled.slots.size(), 0.0);
  fill_scenario(spec, compiled.slots, scenario, state);
  for (const auto& d : spec.diseases) {
    auto it = diseases.find(d);
    if (it == diseases.end())
      throw ValidationError("disease assignment does not set '" + d + "'");
    state[compiled.slots.slot.at(d)] = static_cast<double>(it->second);
  }
  for (const auto& s : spec.symptoms) {
    auto it = symptoms.find(s);
    if (it == symptoms.end())
      throw ValidationError("symptom assignment does not set '" + s + "'");
    state[compiled.slots.slot.at(s)] = static_cast<double>(it->second);
  }
  return compiled.joint_log_prob(state);
}

namespace {

Dataset sample_impl(const GenerativeModel& model, const Scenario* scenario,
                    double fx_prob, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample size must be at least 1");
  const NetworkSpec& spec = model.spec();
  const CompiledModel& compiled = model.compiled();

  std::vector<double> fixed(compiled.slots.size(), 0.0);
  if (scenario) fill_scenario(spec, compiled.slots, *scenario, fixed);

  Dataset data;
  data.column_names.insert(data.column_names.end(), spec.diseases.begin(), spec.diseases.end());
  data.column_names.insert(data.column_names.end(), spec.symptoms.begin(), spec.symptoms.end());
  data.column_names.insert(data.column_names.end(), spec.factors.begin(), spec.factors.end());
  data.column_names.insert(data.column_names.end(), spec.covariates.begin(),
                           spec.covariates.end());
  data.values.resize(n, static_cast<Eigen::Index>(data.column_names.size()));
  data.provenance.source = "simulated";

  const int p = compiled.slots.p, m = compiled.slots.m;
  const int total = compiled.slots.size();
  std::vector<double> state(total);
  for (std::int64_t i = 0; i < n; ++i) {
    SplitMix64 rng = derive_stream(seed, static_cast<std::uint64_t>(i));
    state = fixed;
    if (!scenario) {
      // independent Bernoulli(fx_prob) fills for F then X, declaration order
      for (int s = p + m; s < total; ++s)
        state[s] = rng.bernoulli(fx_prob) ? 1.0 : 0.0;
    }
    for (int slot : compiled.disease_topo_slots) {
      const double prob = glm::sigmoid(compiled.eq_by_slot[slot]->linear_predictor(state));
      state[slot] = rng.bernoulli(prob) ? 1.0 : 0.0;
    }
    for (int slot = p; slot < p + m; ++slot) {
      const double prob = glm::sigmoid(compiled.eq_by_slot[slot]->linear_predictor(state));
      state[slot] = rng.bernoulli(prob) ? 1.0 : 0.0;
    }
    for (int k = 0; k < total; ++k)
      data.values(i, k) = static_cast<std::uint8_t>(state[k]);
  }
  return data;
}

}  // namespace

Dataset sample(const GenerativeModel& model, const Scenario& scenario,
               std::int64_t n, std::uint64_t seed) {
  return sample_impl(model, &scenario, 0.0, n, seed);
}

Dataset sample_random_fx(const GenerativeModel& model, double fx_prob,
                         std::int64_t n, std::uint64_t seed) {
  if (!(fx_prob >= 0.0 && fx_prob <= 1.0))
    throw ValidationError("fx probability must lie in [0,1]");
  return sample_impl(model, nullptr, fx_prob, n, seed);
}

GenerativeModel fit_generative(const NetworkSpec& spec, const Dataset& data,
                               glm::WeightingPolicy policy,
                               const glm::FitOptions& opts) {
  validate_structure(spec);
  validate_dag(spec);

  if (policy == glm::WeightingPolicy::rare_event)
    for (const auto& d : spec.diseases)
      if (!spec.tau.count(d))
        throw ValidationError("rare-event weighting requires tau for disease '" + d +
                              "' but the spec does not declare it");

  std::map<std::string, glm::EquationParams> disease_eqs;
  std::map<std::string, glm::EquationParams> symptom_eqs;
  std::vector<std::string> failures;

  for (const auto& d : spec.diseases) {
    try {
      const auto X =
          build_design(data, design_columns(spec, d, EquationVariant::generative_disease));
      const Eigen::VectorXd y = data.column_as_double(d);
      glm::Weighting w;
      if (policy == glm::WeightingPolicy::rare_event)
        w = glm::rare_event_weights(spec.tau.at(d), y);
      disease_eqs[d] = glm::fit(X, y, w, opts);
    } catch (const std::exception& e) {
      failures.push_back(d + ": " + e.what());
    }
  }
  for (const auto& s : spec.symptoms) {
    try {
      const auto X =
          build_design(data, design_columns(spec, s, EquationVariant::generative_symptom));
      const Eigen::VectorXd y = data.column_as_double(s);
      symptom_eqs[s] = glm::fit(X, y, glm::Weighting{}, opts);  // symptoms: never weighted
    } catch (const std::exception& e) {
      failures.push_back(s + ": " + e.what());
    }
  }
  if (!failures.empty()) {
    std::string msg = "fit_generative failed for " + std::to_string(failures.size()) +
                      " equation(s):";
    for (const auto& f : failures) msg += "\n  " + f;
    throw NumericError(msg);
  }
  return GenerativeModel(spec, std::move(disease_eqs), std::move(symptom_eqs));
}

double exact_conditional(const GenerativeModel& model, const Scenario& scenario,
                         const std::string& target, const Assignment& condition) {
  const NetworkSpec& spec = model.spec();
  if (std::find(spec.diseases.begin(), spec.diseases.end(), target) == spec.diseases.end())
    throw ValidationError("query target '" + target + "' is not a declared disease");
  check_assignment_known(spec, condition, "condition");
  if (condition.count(target))
    throw ValidationError("query target '" + target + "' appears in its own condition");

  const CompiledModel& compiled = model.compiled();
  std::vector<double> state(compiled.slots.size(), 0.0);
  fill_scenario(spec, compiled.slots, scenario, state);
  for (const auto& [name, value] : condition)
    state[compiled.slots.slot.at(name)] = static_cast<double>(value);

  // Free variables in declaration order (diseases then symptoms), target last.
  std::vector<int> free_slots;
  auto add_free = [&](const std::vector<std::string>& names) {
    for (const auto& name : names)
      if (name != target && !condition.count(name))
        free_slots.push_back(compiled.slots.slot.at(name));
  };
  add_free(spec.diseases);
  add_free(spec.symptoms);
  const int target_slot = compiled.slots.slot.at(target);
  free_slots.push_back(target_slot);

  const int bits = static_cast<int>(free_slots.size());
  if (bits > kMaxEnumerationBits) {
    std::ostringstream msg;
    msg << "network too large for exact inference: " << bits
        << " free variables exceed the 2^" << kMaxEnumerationBits << " enumeration cap";
    throw CapacityError(msg.str());
  }

  LogSumExp numerator, denominator;
  const std::uint64_t states = 1ULL << bits;
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    for (int b = 0; b < bits; ++b)
      state[free_slots[b]] = static_cast<double>((mask >> b) & 1ULL);
    const double logp = compiled.joint_log_prob(state);
    denominator.add(logp);
    if (state[target_slot] == 1.0) numerator.add(logp);
  }

  if (denominator.value() == kNegInf)
    throw NumericError("condition has numerically zero probability; conditional undefined");
  if (numerator.value() == kNegInf) return 0.0;
  return std::exp(numerator.value() - denominator.value());
}

}  // namespace comorbid
