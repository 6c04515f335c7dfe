#include "comorbid/params_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "comorbid/errors.hpp"

namespace comorbid {

namespace {
using nlohmann::json;
using nlohmann::ordered_json;
}  // namespace

std::string to_string(ModelVariant variant) {
  return variant == ModelVariant::generative ? "generative" : "misspecified";
}

ModelVariant model_variant_from_string(const std::string& text) {
  if (text == "generative") return ModelVariant::generative;
  if (text == "misspecified") return ModelVariant::misspecified;
  throw ValidationError("unknown model variant '" + text +
                        "' (expected 'generative' or 'misspecified')");
}

ParamsDocument parse_params(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("params parse error: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("variant") || !doc.contains("equations"))
    throw ValidationError("params document must be an object with 'variant' and 'equations'");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "variant" && key != "equations")
      throw ValidationError("unknown params key '" + key + "'");
  }
  if (!doc.at("variant").is_string())
    throw ValidationError("params 'variant' must be a string");

  ParamsDocument out;
  out.variant = model_variant_from_string(doc.at("variant").get<std::string>());
  if (!doc.at("equations").is_object())
    throw ValidationError("params 'equations' must be an object");
  for (const auto& [eq_name, terms] : doc.at("equations").items()) {
    if (!terms.is_object())
      throw ValidationError("equation '" + eq_name + "' must map terms to numbers");
    glm::EquationParams params;
    params.converged = true;  // loaded coefficients are taken as usable
    params.iterations = 0;
    for (const auto& [term, value] : terms.items()) {
      if (!value.is_number())
        throw ValidationError("coefficient '" + term + "' of equation '" + eq_name +
                              "' must be a number");
      params.coefficients[term] = value.get<double>();
    }
    out.equations[eq_name] = std::move(params);
  }
  return out;
}

ParamsDocument read_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open params file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_params(buf.str());
}

std::string serialize_params(const ParamsDocument& doc, const NetworkSpec& spec) {
  ordered_json out;
  out["variant"] = to_string(doc.variant);
  ordered_json equations = ordered_json::object();

  auto emit = [&](const std::string& name, EquationVariant variant) {
    auto it = doc.equations.find(name);
    if (it == doc.equations.end()) return;
    ordered_json terms = ordered_json::object();
    for (const auto& column : design_columns(spec, name, variant)) {
      auto coef = it->second.coefficients.find(column);
      if (coef != it->second.coefficients.end()) terms[column] = coef->second;
    }
    // keep any keys that are not design columns so validation can report them
    for (const auto& [term, value] : it->second.coefficients)
      if (!terms.contains(term)) terms[term] = value;
    equations[name] = terms;
  };

  const EquationVariant disease_variant = doc.variant == ModelVariant::generative
                                              ? EquationVariant::generative_disease
                                              : EquationVariant::misspecified;
  for (const auto& d : spec.diseases) emit(d, disease_variant);
  if (doc.variant == ModelVariant::generative)
    for (const auto& s : spec.symptoms) emit(s, EquationVariant::generative_symptom);
  // equations naming variables outside the spec round-trip unchanged
  for (const auto& [name, params] : doc.equations)
    if (!equations.contains(name)) {
      ordered_json terms = ordered_json::object();
      for (const auto& [term, value] : params.coefficients) terms[term] = value;
      equations[name] = terms;
    }

  out["equations"] = equations;
  return out.dump(2) + "\n";
}

void write_params(const ParamsDocument& doc, const NetworkSpec& spec,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write params file '" + path + "'");
  out << serialize_params(doc, spec);
  if (!out) throw IoError("failed writing params file '" + path + "'");
}

}  // namespace comorbid
