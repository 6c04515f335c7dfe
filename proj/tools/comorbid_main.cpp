// comorbid: fit, simulate and query DAG-structured networks of binary
// disease outcomes, with rare-event weighting and bootstrap/jackknife
// ROC/AUC evaluation.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "comorbid/data_io.hpp"
#include "comorbid/errors.hpp"
#include "comorbid/evaluation.hpp"
#include "comorbid/generative.hpp"
#include "comorbid/glm.hpp"
#include "comorbid/misspec.hpp"
#include "comorbid/model_spec.hpp"
#include "comorbid/params_io.hpp"
#include "comorbid/preset.hpp"

namespace {

using namespace comorbid;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCapacity = 4;

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file '" + path + "'");
  out << content;
  if (!out) throw IoError("failed writing file '" + path + "'");
}

MissingPolicy missing_policy_from(const std::string& text) {
  if (text == "drop-row") return MissingPolicy::drop_row;
  if (text == "fail") return MissingPolicy::fail;
  throw ValidationError("unknown missing policy '" + text + "' (drop-row or fail)");
}

glm::WeightingPolicy weighting_from(const std::string& text) {
  if (text == "none") return glm::WeightingPolicy::none;
  if (text == "rare-event") return glm::WeightingPolicy::rare_event;
  throw ValidationError("unknown weighting '" + text + "' (none or rare-event)");
}

Dataset load_data(const std::string& path, const NetworkSpec& spec,
                  const std::string& missing_policy) {
  Dataset data = read_csv(path, spec, missing_policy_from(missing_policy));
  if (data.provenance.dropped_rows > 0)
    std::cerr << "note: dropped " << data.provenance.dropped_rows
              << " row(s) with missing values\n";
  if (data.n() == 0) throw ValidationError("dataset '" + path + "' has no usable rows");
  return data;
}

std::vector<Query> read_queries(const std::string& path, const NetworkSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open query file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("query parse error: ") + e.what());
  }
  if (!doc.is_array()) throw ValidationError("query file must be a JSON array");
  std::vector<Query> queries;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("target"))
      throw ValidationError("each query must be an object with 'target' and 'condition'");
    Query q;
    q.target = item.at("target").get<std::string>();
    if (item.contains("condition")) {
      for (const auto& [name, value] : item.at("condition").items()) {
        if (!value.is_number_integer() ||
            (value.get<int>() != 0 && value.get<int>() != 1))
          throw ValidationError("query condition value for '" + name + "' must be 0 or 1");
        q.condition[name] = value.get<int>();
      }
    }
    queries.push_back(std::move(q));
  }
  if (queries.empty()) throw ValidationError("query file declares no queries");
  (void)spec;
  return queries;
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::string model;
};

int cmd_validate(const ValidateArgs& args) {
  const NetworkSpec spec = read_spec(args.model);
  const ParentSets parents = validate_dag(spec);
  std::cout << "spec OK: " << spec.diseases.size() << " diseases, "
            << spec.symptoms.size() << " symptoms, " << spec.factors.size()
            << " factors, " << spec.covariates.size() << " covariates\n";
  std::cout << "topological order:";
  for (const auto& d : parents.topo_order) std::cout << " " << d;
  std::cout << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string model;
  std::string params;
  std::string scenarios;
  std::string scenario_name;
  double fx_prob = 0.5;
  std::int64_t n = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  const NetworkSpec spec = read_spec(args.model);
  const GenerativeModel model = make_generative_model(spec, read_params(args.params));

  Dataset data;
  if (!args.scenarios.empty()) {
    const auto scenarios = read_scenarios(args.scenarios, spec);
    if (scenarios.empty()) throw ValidationError("scenario file declares no scenarios");
    const Scenario* chosen = nullptr;
    std::string chosen_name;
    if (args.scenario_name.empty()) {
      chosen = &scenarios.front().second;
      chosen_name = scenarios.front().first;
    } else {
      for (const auto& [name, s] : scenarios)
        if (name == args.scenario_name) {
          chosen = &s;
          chosen_name = name;
        }
      if (!chosen)
        throw ValidationError("scenario '" + args.scenario_name + "' not found in file");
    }
    data = sample(model, *chosen, args.n, args.seed);
    std::cout << "simulated " << data.n() << " rows under scenario '" << chosen_name
              << "'\n";
  } else {
    data = sample_random_fx(model, args.fx_prob, args.n, args.seed);
    std::cout << "simulated " << data.n() << " rows with Bernoulli(" << args.fx_prob
              << ") factors/covariates\n";
  }
  write_csv(data, args.out);
  std::cout << "wrote " << args.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string model;
  std::string data;
  std::string mode = "misspecified";
  std::string weighting = "none";
  std::string missing_policy = "drop-row";
  std::string out;
  std::string report;
  bool strict = false;
};

std::string fit_report_csv(const NetworkSpec& spec, const Dataset& data,
                           const ParamsDocument& doc, glm::WeightingPolicy policy,
                           bool weighted_labels) {
  std::string csv = weighted_labels
                        ? "equation,term,coef,se_naive,or,ci_low_naive,ci_high_naive,converged\n"
                        : "equation,term,coef,se,or,ci_low,ci_high,converged\n";

  auto emit_equation = [&](const std::string& name, EquationVariant variant) {
    auto it = doc.equations.find(name);
    if (it == doc.equations.end()) return;
    const auto columns = design_columns(spec, name, variant);
    const auto& params = it->second;

    std::optional<glm::InferenceStats> stats;
    if (params.converged) {
      const auto X = build_design(data, columns);
      const Eigen::VectorXd y = data.column_as_double(name);
      glm::Weighting w;
      if (policy == glm::WeightingPolicy::rare_event)
        w = glm::rare_event_weights(spec.tau.at(name), y);
      stats = glm::inference_stats(params, X, y, w);
    }

    for (const auto& column : columns) {
      const double coef = params.coefficients.at(column);
      csv += name + "," + column + "," + format_full(coef) + ",";
      if (stats) {
        const auto& orr = stats->odds_ratios.at(column);
        csv += format_full(stats->standard_errors.at(column)) + "," +
               format_full(orr.point) + "," + format_full(orr.ci_low) + "," +
               format_full(orr.ci_high);
      } else {
        csv += "NA,NA,NA,NA";
      }
      csv += std::string(",") + (params.converged ? "true" : "false") + "\n";
    }
  };

  const bool generative = doc.variant == ModelVariant::generative;
  const EquationVariant disease_variant =
      generative ? EquationVariant::generative_disease : EquationVariant::misspecified;
  for (const auto& d : spec.diseases) emit_equation(d, disease_variant);
  if (generative)
    for (const auto& s : spec.symptoms)
      emit_equation(s, EquationVariant::generative_symptom);
  return csv;
}

int cmd_fit(const FitArgs& args) {
  const NetworkSpec spec = read_spec(args.model);
  const Dataset data = load_data(args.data, spec, args.missing_policy);
  const glm::WeightingPolicy policy = weighting_from(args.weighting);

  ParamsDocument doc;
  if (args.mode == "generative") {
    doc = fit_generative(spec, data, policy).to_document();
  } else if (args.mode == "misspecified") {
    doc = fit_misspecified(spec, data, policy).to_document();
  } else {
    throw ValidationError("unknown mode '" + args.mode +
                          "' (generative or misspecified)");
  }

  int not_converged = 0;
  for (const auto& [name, eq] : doc.equations) {
    if (!eq.converged) {
      ++not_converged;
      std::cerr << "warning: equation '" << name << "' did not converge";
      if (eq.separation_suspected) std::cerr << " (possible separation)";
      std::cerr << "\n";
    }
    for (const auto& warning : eq.warnings)
      std::cerr << "note: " << name << ": " << warning << "\n";
  }

  write_params(doc, spec, args.out);
  std::cout << "wrote " << args.out << "\n";
  if (!args.report.empty()) {
    // symptom equations are never weighted, so their inference stays plain
    const bool weighted = policy == glm::WeightingPolicy::rare_event;
    write_text_file(args.report, fit_report_csv(spec, data, doc, policy, weighted));
    std::cout << "wrote " << args.report << (weighted ? " (se/ci labeled naive)" : "")
              << "\n";
  }
  if (args.strict && not_converged > 0)
    throw NumericError(std::to_string(not_converged) + " equation(s) did not converge");
  return kExitOk;
}

// ---------------------------------------------------------------- infer

struct InferArgs {
  std::string model;
  std::string params;
  std::string engine = "misspecified";
  std::string scenarios;
  std::string queries;
  std::string out;
};

int cmd_infer(const InferArgs& args) {
  const NetworkSpec spec = read_spec(args.model);
  const ParentSets parents = validate_dag(spec);
  const ParamsDocument doc = read_params(args.params);
  const auto scenarios = read_scenarios(args.scenarios, spec);
  if (scenarios.empty()) throw ValidationError("scenario file declares no scenarios");

  std::optional<GenerativeModel> gen;
  std::optional<MisspecifiedModel> mis;
  if (args.engine == "generative-exact")
    gen.emplace(make_generative_model(spec, doc));
  else if (args.engine == "misspecified")
    mis.emplace(make_misspecified_model(spec, doc));
  else
    throw ValidationError("unknown engine '" + args.engine +
                          "' (generative-exact or misspecified)");

  std::vector<Query> fixed_queries;
  if (!args.queries.empty()) fixed_queries = read_queries(args.queries, spec);

  std::string csv = "scenario,query,probability\n";
  for (const auto& [name, scenario] : scenarios) {
    const std::vector<Query> queries =
        fixed_queries.empty() ? default_queries(spec, parents, scenario) : fixed_queries;
    for (const auto& q : queries) {
      const double prob = gen ? exact_conditional(*gen, scenario, q.target, q.condition)
                              : diagnostic_prob(*mis, scenario, q.target, q.condition);
      csv += name + "," + query_label(spec, q) + "," + format_full(prob) + "\n";
    }
  }
  write_text_file(args.out, csv);
  std::cout << "wrote " << args.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::string model;
  std::string gen_params;
  std::string mis_params;
  std::string scenarios;
  std::string queries;
  std::string out;
};

int cmd_compare(const CompareArgs& args) {
  const NetworkSpec spec = read_spec(args.model);
  const GenerativeModel gen = make_generative_model(spec, read_params(args.gen_params));
  const MisspecifiedModel mis = make_misspecified_model(spec, read_params(args.mis_params));
  const auto scenarios = read_scenarios(args.scenarios, spec);
  if (scenarios.empty()) throw ValidationError("scenario file declares no scenarios");

  ComparisonTable table;
  if (args.queries.empty()) {
    table = compare_models_default(gen, mis, scenarios);
  } else {
    table = compare_models(gen, mis, scenarios, read_queries(args.queries, spec));
  }

  write_text_file(args.out, table.to_csv());
  std::cout << table.to_text();
  std::cout << "max |exact - misspecified| = " << format_full(table.max_abs_diff()) << "\n";
  std::cout << "wrote " << args.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string methods = "weight,boot+weight,boot,jackkn+weight,jackkn";
  std::string missing_policy = "drop-row";
  int replicates = 20;
  double holdout_fraction = 0.10;
  int folds = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const NetworkSpec spec = read_spec(args.model);
  const Dataset data = load_data(args.data, spec, args.missing_policy);

  std::vector<MethodSpec> methods;
  std::stringstream ss(args.methods);
  std::string token;
  while (std::getline(ss, token, ','))
    if (!token.empty()) methods.push_back(method_from_name(token));
  if (methods.empty()) throw ValidationError("no evaluation methods requested");

  EvalOptions options;
  options.replicates = args.replicates;
  options.holdout_fraction = args.holdout_fraction;
  options.folds = args.folds;
  options.seed = args.seed;

  const EvalReport report = eval_report(spec, data, methods, options);

  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + args.out_dir + "'");
  write_text_file(args.out_dir + "/auc_summary.csv", report.to_table_csv());
  write_text_file(args.out_dir + "/auc_summary.json", report.to_json());
  write_roc_files(report, args.out_dir + "/roc");

  std::cout << report.to_table_csv();
  for (const auto& [equation, row] : report.cells)
    for (const auto& [method, cell] : row)
      if (cell.failures > 0)
        std::cerr << "warning: " << equation << "/" << method << ": " << cell.failures
                  << " failed replicate(s)\n";
  std::cout << "wrote " << args.out_dir << "/auc_summary.{csv,json} and ROC files\n";
  return kExitOk;
}

// ---------------------------------------------------------------- preset

struct PresetArgs {
  std::string name = "ecap-allergy";
  std::string out_dir;
};

int cmd_preset(const PresetArgs& args) {
  if (args.name != "ecap-allergy")
    throw ValidationError("unknown preset '" + args.name + "' (available: ecap-allergy)");
  write_preset(ecap_allergy_preset(), args.out_dir);
  std::cout << "wrote " << args.out_dir
            << "/{spec.json,params_plain.json,params_weighted.json,scenarios.json,README.md}\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"comorbid: DAG-structured binary disease network models"};
  app.require_subcommand(1);

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand("validate", "Parse and validate a model spec");
  validate->add_option("--model", validate_args.model, "Model spec JSON file")->required();

  SimulateArgs simulate_args;
  auto* simulate =
      app.add_subcommand("simulate", "Draw a synthetic dataset from a generative model");
  simulate->add_option("--model", simulate_args.model, "Model spec JSON file")->required();
  simulate->add_option("--params", simulate_args.params, "Generative params JSON file")
      ->required();
  simulate->add_option("--scenarios", simulate_args.scenarios,
                       "Scenario file fixing factors/covariates");
  simulate->add_option("--scenario", simulate_args.scenario_name,
                       "Scenario name within the file (default: first)");
  simulate->add_option("--fx-prob", simulate_args.fx_prob,
                       "Bernoulli rate for factors/covariates when no scenario is given")
      ->capture_default_str();
  simulate->add_option("--n", simulate_args.n, "Number of rows")->capture_default_str();
  simulate->add_option("--seed", simulate_args.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--out", simulate_args.out, "Output CSV path")->required();

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit model equations to a dataset");
  fit->add_option("--model", fit_args.model, "Model spec JSON file")->required();
  fit->add_option("--data", fit_args.data, "Dataset CSV")->required();
  fit->add_option("--mode", fit_args.mode, "generative or misspecified")
      ->capture_default_str();
  fit->add_option("--weighting", fit_args.weighting, "none or rare-event")
      ->capture_default_str();
  fit->add_option("--missing-policy", fit_args.missing_policy, "drop-row or fail")
      ->capture_default_str();
  fit->add_option("--out", fit_args.out, "Output params JSON path")->required();
  fit->add_option("--report", fit_args.report,
                  "Optional fit report CSV (coef/se/or/ci per term)");
  fit->add_flag("--strict", fit_args.strict, "Exit 3 when any equation fails to converge");

  InferArgs infer_args;
  auto* infer = app.add_subcommand("infer", "Diagnostic probabilities for scenarios");
  infer->add_option("--model", infer_args.model, "Model spec JSON file")->required();
  infer->add_option("--params", infer_args.params, "Params JSON file")->required();
  infer->add_option("--engine", infer_args.engine, "generative-exact or misspecified")
      ->capture_default_str();
  infer->add_option("--scenarios", infer_args.scenarios, "Scenario JSON file")->required();
  infer->add_option("--queries", infer_args.queries,
                    "Optional query JSON file (default: paper-style query set)");
  infer->add_option("--out", infer_args.out, "Output CSV path")->required();

  CompareArgs compare_args;
  auto* compare =
      app.add_subcommand("compare", "Compare generative (exact) and misspecified engines");
  compare->add_option("--model", compare_args.model, "Model spec JSON file")->required();
  compare->add_option("--gen-params", compare_args.gen_params, "Generative params JSON")
      ->required();
  compare->add_option("--mis-params", compare_args.mis_params, "Misspecified params JSON")
      ->required();
  compare->add_option("--scenarios", compare_args.scenarios, "Scenario JSON file")
      ->required();
  compare->add_option("--queries", compare_args.queries, "Optional query JSON file");
  compare->add_option("--out", compare_args.out, "Output CSV path")->required();

  EvaluateArgs evaluate_args;
  auto* evaluate =
      app.add_subcommand("evaluate", "Bootstrap/jackknife ROC/AUC evaluation grid");
  evaluate->add_option("--model", evaluate_args.model, "Model spec JSON file")->required();
  evaluate->add_option("--data", evaluate_args.data, "Dataset CSV")->required();
  evaluate->add_option("--methods", evaluate_args.methods,
                       "Comma list of weight,plain,boot+weight,boot,jackkn+weight,jackkn")
      ->capture_default_str();
  evaluate->add_option("--replicates", evaluate_args.replicates,
                       "Bootstrap replicates / jackknife repeats")
      ->capture_default_str();
  evaluate->add_option("--holdout-fraction", evaluate_args.holdout_fraction,
                       "Jackknife holdout fraction")
      ->capture_default_str();
  evaluate->add_option("--folds", evaluate_args.folds,
                       "Use true k-fold splits instead of repeated holdout (0 = off)")
      ->capture_default_str();
  evaluate->add_option("--seed", evaluate_args.seed, "RNG seed")->capture_default_str();
  evaluate->add_option("--missing-policy", evaluate_args.missing_policy,
                       "drop-row or fail")
      ->capture_default_str();
  evaluate->add_option("--out-dir", evaluate_args.out_dir, "Output directory")->required();

  PresetArgs preset_args;
  auto* preset = app.add_subcommand("preset", "Write a bundled example network");
  preset->add_option("name", preset_args.name, "Preset name")->capture_default_str();
  preset->add_option("--out-dir", preset_args.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*validate) return cmd_validate(validate_args);
    if (*simulate) return cmd_simulate(simulate_args);
    if (*fit) return cmd_fit(fit_args);
    if (*infer) return cmd_infer(infer_args);
    if (*compare) return cmd_compare(compare_args);
    if (*evaluate) return cmd_evaluate(evaluate_args);
    if (*preset) return cmd_preset(preset_args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
