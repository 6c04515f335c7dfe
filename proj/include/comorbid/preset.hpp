#pragma once

#include <string>
#include <vector>

#include "comorbid/model_spec.hpp"
#include "comorbid/params_io.hpp"

namespace comorbid {

// The bundled allergy-network preset: 5 diseases, 3 symptoms, 5 family-history
// factors, 4 control covariates, published coefficient sets for the
// misspecified model (plain and weighted fits) and the five covariate
// scenarios used for model comparison.
struct PresetBundle {
  NetworkSpec spec;               // tau included
  ParamsDocument params_plain;    // misspecified variant
  ParamsDocument params_weighted; // misspecified variant, coefficients only
  std::vector<NamedScenario> scenarios;  // case1..case5
};

PresetBundle ecap_allergy_preset();

// Writes spec.json, params_plain.json, params_weighted.json, scenarios.json
// and a README.md documenting the encoding choices.
void write_preset(const PresetBundle& preset, const std::string& dir);

}  // namespace comorbid
