#include "comorbid/preset.hpp"

#include <filesystem>
#include <fstream>

#include "comorbid/data_io.hpp"
#include "comorbid/errors.hpp"

namespace comorbid {

namespace {

glm::EquationParams equation(std::map<std::string, double> coefficients) {
  glm::EquationParams params;
  params.coefficients = std::move(coefficients);
  params.converged = true;
  return params;
}

Scenario make_scenario(int x3_urban, int family_history, int symptoms) {
  Scenario s;
  // children 13-14 y.o. (X1=1, X2=0), male (X4=1); X3 encodes urban area.
  s.covariate_values = {{"X1", 1}, {"X2", 0}, {"X3", x3_urban}, {"X4", 1}};
  for (const auto* f : {"F1", "F2", "F3", "F4", "F5"})
    s.factor_values[f] = family_history;
  for (const auto* sym : {"S1", "S2", "S3"}) s.symptom_values[sym] = symptoms;
  return s;
}

constexpr const char* kPresetReadme = R"(# ecap-allergy preset

A five-disease allergy comorbidity network with published coefficient sets,
bundled as a worked example and as fixture data for the test suites.

## Files

- `spec.json` — network structure (see below), including the per-disease
  population fractions `tau` used by rare-event weighting.
- `params_plain.json` — misspecified-model coefficients from the standard
  (unweighted) logistic fits.
- `params_weighted.json` — misspecified-model coefficients from the
  rare-event-weighted fits. This set ships coefficients only: no standard
  errors were published for it. Values are stored verbatim, including the
  surprising intercept for Y3 (-6.212 vs the plain fit's -4.741).
- `scenarios.json` — the five covariate scenarios used for the
  generative-vs-misspecified comparison tables.

## Variables

Diseases (binary):
- Y1 atopic asthma
- Y2 intermittent allergic rhinitis
- Y3 chronic allergic rhinitis
- Y4 allergic dermatitis
- Y5 food allergy

Symptoms (binary): S1 wheezing/whistling in the chest, S2 sneezing or
runny/blocked nose without a cold, S3 eczema or other skin allergy.

Common factors (binary family-history indicators): F1 mother, F2 father,
F3 siblings, F4 maternal grandparents, F5 paternal grandparents.

Covariates: the three-level age group is pre-encoded as two indicators,
X1 = children 13-14 y.o., X2 = adults (20-44 y.o.); both zero means
children 6-7 y.o. X3 = urban area, X4 = male.

## Structure

Disease edges (parent -> child): Y2->Y1, Y3->Y1, Y4->Y1, Y4->Y2, Y4->Y3,
Y5->Y4. Symptom associations (stored disease -> symptom; the misspecified
model reverses them): Y1-S1, Y2-S2, Y3-S2, Y4-S3.

## Scenario encoding

All five cases use children 13-14 y.o. (X1=1, X2=0) and male (X4=1):
- case1: rural (X3=0), no family history, no symptoms
- case2: rural, no family history, all symptoms present
- case3: urban (X3=1), no family history, all symptoms present
- case4: urban, no family history, no symptoms
- case5: urban, full family history, all symptoms present

## Notes

Published coefficients cover the equations for Y1..Y4. Y5's equation
(intercept, covariates, factors) was not reported; both parameter files
carry an all-zero placeholder for it so that the documents validate against
the network structure. Queries touching Y5's own distribution should fit
that equation from data rather than rely on the placeholder.
)";

}  // namespace

PresetBundle ecap_allergy_preset() {
  PresetBundle preset;

  NetworkSpec& spec = preset.spec;
  spec.diseases = {"Y1", "Y2", "Y3", "Y4", "Y5"};
  spec.symptoms = {"S1", "S2", "S3"};
  spec.factors = {"F1", "F2", "F3", "F4", "F5"};
  spec.covariates = {"X1", "X2", "X3", "X4"};
  spec.disease_edges = {{"Y2", "Y1"}, {"Y3", "Y1"}, {"Y4", "Y1"},
                        {"Y4", "Y2"}, {"Y4", "Y3"}, {"Y5", "Y4"}};
  spec.symptom_edges = {{"Y1", "S1"}, {"Y2", "S2"}, {"Y3", "S2"}, {"Y4", "S3"}};
  spec.tau = {{"Y1", 0.11}, {"Y2", 0.20}, {"Y3", 0.04}, {"Y4", 0.07}, {"Y5", 0.10}};

  preset.params_plain.variant = ModelVariant::misspecified;
  preset.params_plain.equations = {
      {"Y1", equation({{"intercept", -5.933},
                       {"Y2", 1.265},
                       {"Y3", 2.040},
                       {"Y4", 0.713},
                       {"S1", 1.412},
                       {"X1", 0.355},
                       {"X2", 0.216},
                       {"X3", -0.336},
                       {"X4", 0.412},
                       {"F1", -0.075},
                       {"F2", -0.108},
                       {"F3", 0.194},
                       {"F4", 0.029},
                       {"F5", 0.736}})},
      {"Y2", equation({{"intercept", -4.000},
                       {"Y4", 0.143},
                       {"S2", 1.379},
                       {"X1", 0.287},
                       {"X2", 0.364},
                       {"X3", -0.384},
                       {"X4", -0.038},
                       {"F1", -0.045},
                       {"F2", 0.284},
                       {"F3", 0.313},
                       {"F4", 0.090},
                       {"F5", -0.135}})},
      {"Y3", equation({{"intercept", -4.741},
                       {"Y4", 0.496},
                       {"S2", 1.628},
                       {"X1", 0.335},
                       {"X2", 0.271},
                       {"X3", -0.004},
                       {"X4", 0.334},
                       {"F1", 0.055},
                       {"F2", 0.186},
                       {"F3", -0.039},
                       {"F4", -0.144},
                       {"F5", -0.022}})},
      {"Y4", equation({{"intercept", -6.073},
                       {"Y5", 1.132},
                       {"S3", 1.780},
                       {"X1", 0.195},
                       {"X2", -0.623},
                       {"X3", 0.395},
                       {"X4", -0.103},
                       {"F1", 0.331},
                       {"F2", 0.220},
                       {"F3", 0.061},
                       {"F4", -0.380},
                       {"F5", 0.470}})},
      {"Y5", equation({{"intercept", 0.0},
                       {"X1", 0.0},
                       {"X2", 0.0},
                       {"X3", 0.0},
                       {"X4", 0.0},
                       {"F1", 0.0},
                       {"F2", 0.0},
                       {"F3", 0.0},
                       {"F4", 0.0},
                       {"F5", 0.0}})},
  };

  preset.params_weighted.variant = ModelVariant::misspecified;
  preset.params_weighted.equations = {
      {"Y1", equation({{"intercept", -5.053},
                       {"Y2", 1.392},
                       {"Y3", 2.085},
                       {"Y4", 0.753},
                       {"S1", 1.392},
                       {"X1", 0.356},
                       {"X2", 0.206},
                       {"X3", -0.349},
                       {"X4", 0.447},
                       {"F1", -0.039},
                       {"F2", -0.092},
                       {"F3", 0.181},
                       {"F4", 0.024},
                       {"F5", 0.737}})},
      {"Y2", equation({{"intercept", -3.544},
                       {"Y4", 0.140},
                       {"S2", 1.377},
                       {"X1", 0.289},
                       {"X2", 0.355},
                       {"X3", -0.377},
                       {"X4", -0.042},
                       {"F1", -0.041},
                       {"F2", 0.285},
                       {"F3", 0.310},
                       {"F4", 0.088},
                       {"F5", -0.154}})},
      {"Y3", equation({{"intercept", -6.212},
                       {"Y4", 0.450},
                       {"S2", 1.628},
                       {"X1", 0.319},
                       {"X2", 0.263},
                       {"X3", 0.024},
                       {"X4", 0.341},
                       {"F1", 0.061},
                       {"F2", 0.186},
                       {"F3", -0.042},
                       {"F4", -0.163},
                       {"F5", 0.001}})},
      {"Y4", equation({{"intercept", -3.301},
                       {"Y5", 1.302},
                       {"S3", 1.800},
                       {"X1", 0.139},
                       {"X2", -0.646},
                       {"X3", 0.278},
                       {"X4", -0.104},
                       {"F1", 0.414},
                       {"F2", 0.322},
                       {"F3", -0.009},
                       {"F4", -0.480},
                       {"F5", 0.409}})},
      {"Y5", equation({{"intercept", 0.0},
                       {"X1", 0.0},
                       {"X2", 0.0},
                       {"X3", 0.0},
                       {"X4", 0.0},
                       {"F1", 0.0},
                       {"F2", 0.0},
                       {"F3", 0.0},
                       {"F4", 0.0},
                       {"F5", 0.0}})},
  };

  preset.scenarios = {
      {"case1", make_scenario(0, 0, 0)},
      {"case2", make_scenario(0, 0, 1)},
      {"case3", make_scenario(1, 0, 1)},
      {"case4", make_scenario(1, 0, 0)},
      {"case5", make_scenario(1, 1, 1)},
  };
  return preset;
}

void write_preset(const PresetBundle& preset, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create preset directory '" + dir + "': " + ec.message());

  write_spec(preset.spec, dir + "/spec.json");
  write_params(preset.params_plain, preset.spec, dir + "/params_plain.json");
  write_params(preset.params_weighted, preset.spec, dir + "/params_weighted.json");
  write_scenarios(preset.scenarios, dir + "/scenarios.json");

  std::ofstream readme(dir + "/README.md", std::ios::binary);
  if (!readme) throw IoError("cannot write preset README under '" + dir + "'");
  readme << kPresetReadme;
  if (!readme) throw IoError("failed writing preset README under '" + dir + "'");
}

}  // namespace comorbid
