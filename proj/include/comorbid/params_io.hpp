#pragma once

#include <map>
#include <string>

#include "comorbid/glm.hpp"
#include "comorbid/model_spec.hpp"

namespace comorbid {

enum class ModelVariant { generative, misspecified };

std::string to_string(ModelVariant variant);
ModelVariant model_variant_from_string(const std::string& text);

// Parameter document: {"variant": ..., "equations": {name: {term: value}}}.
// For the generative variant the equations cover diseases and symptoms; for
// the misspecified variant diseases only. Loaded equations are marked
// converged with zero iterations.
struct ParamsDocument {
  ModelVariant variant = ModelVariant::misspecified;
  std::map<std::string, glm::EquationParams> equations;
};

ParamsDocument parse_params(const std::string& text);
ParamsDocument read_params(const std::string& path);

// Serialization orders equations and terms by the spec's declaration/design
// order so identical inputs produce identical bytes.
std::string serialize_params(const ParamsDocument& doc, const NetworkSpec& spec);
void write_params(const ParamsDocument& doc, const NetworkSpec& spec,
                  const std::string& path);

}  // namespace comorbid
