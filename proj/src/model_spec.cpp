#include "comorbid/model_spec.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "comorbid/errors.hpp"

namespace comorbid {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> string_array(const json& j, const std::string& key) {
  if (!j.at(key).is_array())
    throw ValidationError("spec key '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : j.at(key)) {
    if (!item.is_string())
      throw ValidationError("spec key '" + key + "' must contain only strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> edge_array(const json& j,
                                                            const std::string& key) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array())
    throw ValidationError("spec key '" + key + "' must be an array of 2-element arrays");
  for (const auto& item : j.at(key)) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_string())
      throw ValidationError("spec key '" + key + "' entries must be [from, to] string pairs");
    out.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
  }
  return out;
}

// Index of each name in its declaration list, for declaration-order sorting.
std::map<std::string, std::size_t> index_of(const std::vector<std::string>& names) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < names.size(); ++i) idx[names[i]] = i;
  return idx;
}

}  // namespace

NetworkSpec parse_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("spec parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("spec document must be a JSON object");

  static const std::set<std::string> known_keys = {
      "diseases", "symptoms", "factors", "covariates",
      "disease_edges", "symptom_edges", "tau"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (!known_keys.count(key))
      throw ValidationError("unknown spec key '" + key + "'");
  }
  if (!doc.contains("diseases"))
    throw ValidationError("spec is missing required key 'diseases'");

  NetworkSpec spec;
  spec.diseases = string_array(doc, "diseases");
  if (doc.contains("symptoms")) spec.symptoms = string_array(doc, "symptoms");
  if (doc.contains("factors")) spec.factors = string_array(doc, "factors");
  if (doc.contains("covariates")) spec.covariates = string_array(doc, "covariates");
  spec.disease_edges = edge_array(doc, "disease_edges");
  spec.symptom_edges = edge_array(doc, "symptom_edges");
  if (doc.contains("tau")) {
    if (!doc.at("tau").is_object())
      throw ValidationError("spec key 'tau' must be an object of disease -> fraction");
    for (const auto& [name, value] : doc.at("tau").items()) {
      if (!value.is_number())
        throw ValidationError("tau entry for '" + name + "' must be a number");
      spec.tau[name] = value.get<double>();
    }
  }

  validate_structure(spec);
  validate_dag(spec);  // acyclicity is a NetworkSpec invariant
  return spec;
}

void validate_structure(const NetworkSpec& spec) {
  if (spec.diseases.empty())
    throw ValidationError("spec must declare at least one disease");

  std::map<std::string, std::string> group_of;
  auto declare = [&](const std::vector<std::string>& names, const char* group) {
    for (const auto& name : names) {
      if (name.empty()) throw ValidationError("empty variable name");
      auto [it, inserted] = group_of.emplace(name, group);
      if (!inserted)
        throw ValidationError("duplicate variable name '" + name + "' (already declared as " +
                              it->second + ")");
    }
  };
  declare(spec.diseases, "disease");
  declare(spec.symptoms, "symptom");
  declare(spec.factors, "factor");
  declare(spec.covariates, "covariate");

  auto require_group = [&](const std::string& name, const std::string& group,
                           const char* where) {
    auto it = group_of.find(name);
    if (it == group_of.end())
      throw ValidationError(std::string("unknown variable '") + name + "' in " + where);
    if (it->second != group)
      throw ValidationError("variable '" + name + "' in " + where + " must be a " + group +
                            ", not a " + it->second);
  };

  std::set<std::pair<std::string, std::string>> seen_disease_edges;
  for (const auto& [parent, child] : spec.disease_edges) {
    require_group(parent, "disease", "disease_edges");
    require_group(child, "disease", "disease_edges");
    if (parent == child)
      throw ValidationError("self-loop on disease '" + parent + "'");
    if (!seen_disease_edges.emplace(parent, child).second)
      throw ValidationError("duplicate disease edge " + parent + " -> " + child);
  }

  std::set<std::pair<std::string, std::string>> seen_symptom_edges;
  for (const auto& [disease, symptom] : spec.symptom_edges) {
    require_group(disease, "disease", "symptom_edges");
    require_group(symptom, "symptom", "symptom_edges");
    if (!seen_symptom_edges.emplace(disease, symptom).second)
      throw ValidationError("duplicate symptom edge " + disease + " -> " + symptom);
  }

  for (const auto& [name, value] : spec.tau) {
    require_group(name, "disease", "tau");
    if (!(value > 0.0 && value < 1.0)) {
      std::ostringstream msg;
      msg << "tau for '" << name << "' must lie strictly in (0,1), got " << value;
      throw ValidationError(msg.str());
    }
  }
}

ParentSets validate_dag(const NetworkSpec& spec) {
  const auto disease_idx = index_of(spec.diseases);
  const auto symptom_idx = index_of(spec.symptoms);
  const std::size_t p = spec.diseases.size();

  // children[k] = declaration indices of diseases k points to
  std::vector<std::vector<std::size_t>> children(p);
  for (const auto& [parent, child] : spec.disease_edges)
    children[disease_idx.at(parent)].push_back(disease_idx.at(child));
  for (auto& c : children) std::sort(c.begin(), c.end());

  // Iterative DFS with tri-color marking; the first back edge found yields
  // the reported cycle.
  enum class Mark { unvisited, active, done };
  std::vector<Mark> mark(p, Mark::unvisited);
  std::vector<std::size_t> order;  // reverse-postorder accumulator
  order.reserve(p);

  std::vector<std::size_t> path;
  auto dfs = [&](auto&& self, std::size_t v) -> void {
    mark[v] = Mark::active;
    path.push_back(v);
    for (std::size_t u : children[v]) {
      if (mark[u] == Mark::active) {
        auto start = std::find(path.begin(), path.end(), u);
        std::string cycle;
        for (auto it = start; it != path.end(); ++it) {
          if (!cycle.empty()) cycle += " -> ";
          cycle += spec.diseases[*it];
        }
        cycle += " -> " + spec.diseases[u];
        throw ValidationError("disease graph has a cycle: " + cycle);
      }
      if (mark[u] == Mark::unvisited) self(self, u);
    }
    path.pop_back();
    mark[v] = Mark::done;
    order.push_back(v);
  };
  for (std::size_t v = 0; v < p; ++v)
    if (mark[v] == Mark::unvisited) dfs(dfs, v);
  std::reverse(order.begin(), order.end());

  ParentSets out;
  for (const auto& d : spec.diseases) out.disease_parents[d] = {};
  for (const auto& s : spec.symptoms) out.symptom_parents_gen[s] = {};
  for (const auto& d : spec.diseases) out.symptom_inputs_mis[d] = {};

  for (const auto& [parent, child] : spec.disease_edges)
    out.disease_parents[child].push_back(parent);
  for (const auto& [disease, symptom] : spec.symptom_edges) {
    out.symptom_parents_gen[symptom].push_back(disease);
    out.symptom_inputs_mis[disease].push_back(symptom);
  }

  auto by_declaration = [](const std::map<std::string, std::size_t>& idx) {
    return [&idx](const std::string& a, const std::string& b) {
      return idx.at(a) < idx.at(b);
    };
  };
  for (auto& [name, parents] : out.disease_parents)
    std::sort(parents.begin(), parents.end(), by_declaration(disease_idx));
  for (auto& [name, parents] : out.symptom_parents_gen)
    std::sort(parents.begin(), parents.end(), by_declaration(disease_idx));
  for (auto& [name, inputs] : out.symptom_inputs_mis)
    std::sort(inputs.begin(), inputs.end(), by_declaration(symptom_idx));

  out.topo_order.reserve(p);
  for (std::size_t v : order) out.topo_order.push_back(spec.diseases[v]);
  return out;
}

std::vector<std::string> design_columns(const NetworkSpec& spec,
                                        const std::string& equation,
                                        EquationVariant variant) {
  const ParentSets parents = validate_dag(spec);

  std::vector<std::string> columns{kInterceptColumn};
  if (variant == EquationVariant::generative_symptom) {
    auto it = parents.symptom_parents_gen.find(equation);
    if (it == parents.symptom_parents_gen.end())
      throw ValidationError("unknown symptom equation '" + equation + "'");
    columns.insert(columns.end(), it->second.begin(), it->second.end());
  } else {
    auto it = parents.disease_parents.find(equation);
    if (it == parents.disease_parents.end())
      throw ValidationError("unknown disease equation '" + equation + "'");
    columns.insert(columns.end(), it->second.begin(), it->second.end());
    if (variant == EquationVariant::misspecified) {
      const auto& inputs = parents.symptom_inputs_mis.at(equation);
      columns.insert(columns.end(), inputs.begin(), inputs.end());
    }
  }
  columns.insert(columns.end(), spec.covariates.begin(), spec.covariates.end());
  columns.insert(columns.end(), spec.factors.begin(), spec.factors.end());
  return columns;
}

std::string serialize_spec(const NetworkSpec& spec) {
  ordered_json doc;
  doc["diseases"] = spec.diseases;
  doc["symptoms"] = spec.symptoms;
  doc["factors"] = spec.factors;
  doc["covariates"] = spec.covariates;
  doc["disease_edges"] = ordered_json::array();
  for (const auto& [parent, child] : spec.disease_edges)
    doc["disease_edges"].push_back({parent, child});
  doc["symptom_edges"] = ordered_json::array();
  for (const auto& [disease, symptom] : spec.symptom_edges)
    doc["symptom_edges"].push_back({disease, symptom});
  if (!spec.tau.empty()) {
    ordered_json tau = ordered_json::object();
    for (const auto& d : spec.diseases) {
      auto it = spec.tau.find(d);
      if (it != spec.tau.end()) tau[d] = it->second;
    }
    doc["tau"] = tau;
  }
  return doc.dump(2) + "\n";
}

NetworkSpec read_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

void write_spec(const NetworkSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write spec file '" + path + "'");
  out << serialize_spec(spec);
  if (!out) throw IoError("failed writing spec file '" + path + "'");
}

}  // namespace comorbid
