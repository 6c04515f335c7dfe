#include "comorbid/misspec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "comorbid/errors.hpp"

namespace comorbid {

namespace {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

MisspecifiedModel::MisspecifiedModel(NetworkSpec spec,
                                     std::map<std::string, glm::EquationParams> disease_eqs)
    : spec_(std::move(spec)), disease_eqs_(std::move(disease_eqs)) {
  validate_structure(spec_);
  parents_ = validate_dag(spec_);

  for (const auto& d : spec_.diseases)
    if (!disease_eqs_.count(d))
      throw ValidationError("misspecified model is missing the equation for disease '" + d +
                            "'");
  if (disease_eqs_.size() != spec_.diseases.size())
    throw ValidationError("misspecified model has equations for undeclared diseases");

  for (const auto& d : spec_.diseases) {
    const auto columns = design_columns(spec_, d, EquationVariant::misspecified);
    const auto& coefs = disease_eqs_.at(d).coefficients;
    if (coefs.size() != columns.size()) {
      std::ostringstream msg;
      msg << "equation '" << d << "' has " << coefs.size() << " coefficients, expected "
          << columns.size();
      throw ValidationError(msg.str());
    }
    for (const auto& column : columns) {
      auto it = coefs.find(column);
      if (it == coefs.end())
        throw ValidationError("equation '" + d + "' is missing coefficient '" + column + "'");
      if (!std::isfinite(it->second))
        throw ValidationError("equation '" + d + "' has a non-finite coefficient '" + column +
                              "'");
    }
  }
}

ParamsDocument MisspecifiedModel::to_document() const {
  ParamsDocument doc;
  doc.variant = ModelVariant::misspecified;
  doc.equations = disease_eqs_;
  return doc;
}

MisspecifiedModel make_misspecified_model(const NetworkSpec& spec,
                                          const ParamsDocument& doc) {
  if (doc.variant != ModelVariant::misspecified)
    throw ValidationError("params document has variant '" + to_string(doc.variant) +
                          "', expected 'misspecified'");
  for (const auto& [name, eq] : doc.equations) {
    (void)eq;
    if (std::find(spec.diseases.begin(), spec.diseases.end(), name) == spec.diseases.end())
      throw ValidationError("params equation '" + name + "' names no declared disease");
  }
  return MisspecifiedModel(spec, doc.equations);
}

MisspecifiedModel fit_misspecified(const NetworkSpec& spec, const Dataset& data,
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
  std::vector<std::string> failures;
  for (const auto& d : spec.diseases) {
    try {
      const auto X =
          build_design(data, design_columns(spec, d, EquationVariant::misspecified));
      const Eigen::VectorXd y = data.column_as_double(d);
      glm::Weighting w;
      if (policy == glm::WeightingPolicy::rare_event)
        w = glm::rare_event_weights(spec.tau.at(d), y);
      disease_eqs[d] = glm::fit(X, y, w, opts);
    } catch (const std::exception& e) {
      failures.push_back(d + ": " + e.what());
    }
  }
  if (!failures.empty()) {
    std::string msg = "fit_misspecified failed for " + std::to_string(failures.size()) +
                      " equation(s):";
    for (const auto& f : failures) msg += "\n  " + f;
    throw NumericError(msg);
  }
  return MisspecifiedModel(spec, std::move(disease_eqs));
}

double diagnostic_prob(const MisspecifiedModel& model, const Scenario& scenario,
                       const std::string& target, const Assignment& condition) {
  const NetworkSpec& spec = model.spec();
  auto eq = model.disease_eqs().find(target);
  if (eq == model.disease_eqs().end())
    throw ValidationError("query target '" + target + "' is not a declared disease");

  auto lookup = [&](const std::map<std::string, int>& values, const std::string& name,
                    const char* where) -> double {
    auto it = values.find(name);
    if (it == values.end())
      throw ValidationError("diagnostic query for '" + target + "' is missing '" + name +
                            "' in the " + where);
    return static_cast<double>(it->second);
  };

  const auto& parents = model.parents();
  double lp = eq->second.coefficients.at(kInterceptColumn);
  for (const auto& parent : parents.disease_parents.at(target))
    lp += eq->second.coefficients.at(parent) * lookup(condition, parent, "condition");
  for (const auto& symptom : parents.symptom_inputs_mis.at(target))
    lp += eq->second.coefficients.at(symptom) * lookup(condition, symptom, "condition");
  for (const auto& covariate : spec.covariates)
    lp += eq->second.coefficients.at(covariate) *
          lookup(scenario.covariate_values, covariate, "scenario covariates");
  for (const auto& factor : spec.factors)
    lp += eq->second.coefficients.at(factor) *
          lookup(scenario.factor_values, factor, "scenario factors");
  return glm::sigmoid(lp);
}

std::string query_label(const NetworkSpec& spec, const Query& query) {
  std::string label = "P(" + query.target + "=1";
  std::string cond;
  auto append_group = [&](const std::vector<std::string>& names) {
    for (const auto& name : names) {
      auto it = query.condition.find(name);
      if (it == query.condition.end()) continue;
      if (!cond.empty()) cond += ",";
      cond += name + "=" + std::to_string(it->second);
    }
  };
  append_group(spec.diseases);
  append_group(spec.symptoms);
  if (!cond.empty()) label += "|" + cond;
  return label + ")";
}

std::vector<Query> default_queries(const NetworkSpec& spec, const ParentSets& parents,
                                   const Scenario& scenario) {
  std::vector<Query> queries;
  // all-parents-0 queries first, then all-parents-1, mirroring the published
  // comparison tables
  for (int parent_value : {0, 1}) {
    for (const auto& d : spec.diseases) {
      const auto& inputs = parents.symptom_inputs_mis.at(d);
      if (inputs.empty()) continue;
      Query q;
      q.target = d;
      for (const auto& parent : parents.disease_parents.at(d))
        q.condition[parent] = parent_value;
      for (const auto& symptom : inputs) {
        auto it = scenario.symptom_values.find(symptom);
        if (it != scenario.symptom_values.end()) q.condition[symptom] = it->second;
      }
      queries.push_back(std::move(q));
    }
  }
  return queries;
}

double ComparisonTable::max_abs_diff() const {
  double best = 0.0;
  for (const auto& row : rows) best = std::max(best, row.abs_diff);
  return best;
}

std::string ComparisonTable::to_csv() const {
  std::string out = "scenario,query,exact,misspecified,abs_diff\n";
  for (const auto& row : rows) {
    out += row.scenario + "," + row.query + "," + format_full(row.exact) + "," +
           format_full(row.misspecified) + "," + format_full(row.abs_diff) + "\n";
  }
  return out;
}

std::string ComparisonTable::to_text() const {
  std::size_t w_scenario = 8, w_query = 5;
  for (const auto& row : rows) {
    w_scenario = std::max(w_scenario, row.scenario.size());
    w_query = std::max(w_query, row.query.size());
  }
  std::ostringstream out;
  out << std::left;
  out.width(static_cast<std::streamsize>(w_scenario + 2));
  out << "scenario";
  out.width(static_cast<std::streamsize>(w_query + 2));
  out << "query";
  out << "exact   misspec  |diff|\n";
  for (const auto& row : rows) {
    out.width(static_cast<std::streamsize>(w_scenario + 2));
    out << row.scenario;
    out.width(static_cast<std::streamsize>(w_query + 2));
    out << row.query;
    out << format_fixed3(row.exact) << "   " << format_fixed3(row.misspecified) << "    "
        << format_fixed3(row.abs_diff) << "\n";
  }
  return out.str();
}

ComparisonTable compare_models(const GenerativeModel& gen, const MisspecifiedModel& mis,
                               const std::vector<NamedScenario>& scenarios,
                               const std::vector<Query>& queries) {
  if (!(gen.spec() == mis.spec()))
    throw ValidationError("compare_models requires both models to share one network spec");
  ComparisonTable table;
  for (const auto& [name, scenario] : scenarios) {
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      const Query& q = queries[qi];
      ComparisonRow row;
      row.scenario = name;
      row.query = query_label(gen.spec(), q);
      try {
        row.exact = exact_conditional(gen, scenario, q.target, q.condition);
        row.misspecified = diagnostic_prob(mis, scenario, q.target, q.condition);
      } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "scenario '" << name << "', query " << qi << " (" << row.query
            << "): " << e.what();
        throw ValidationError(msg.str());
      }
      row.abs_diff = std::abs(row.exact - row.misspecified);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

ComparisonTable compare_models_default(const GenerativeModel& gen,
                                       const MisspecifiedModel& mis,
                                       const std::vector<NamedScenario>& scenarios) {
  if (!(gen.spec() == mis.spec()))
    throw ValidationError("compare_models requires both models to share one network spec");
  ComparisonTable table;
  for (const auto& [name, scenario] : scenarios) {
    const auto queries = default_queries(gen.spec(), gen.parents(), scenario);
    std::vector<NamedScenario> one{{name, scenario}};
    auto part = compare_models(gen, mis, one, queries);
    table.rows.insert(table.rows.end(), part.rows.begin(), part.rows.end());
  }
  return table;
}

}  // namespace comorbid
