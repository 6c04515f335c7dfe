#include "comorbid/data_io.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "comorbid/errors.hpp"

namespace comorbid {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::map<std::string, int> binary_map(const json& obj, const NetworkSpec& spec,
                                      const std::vector<std::string>& group,
                                      const std::string& what) {
  std::map<std::string, int> out;
  if (obj.is_null()) return out;
  if (!obj.is_object())
    throw ValidationError("scenario key '" + what + "' must be an object");
  for (const auto& [name, value] : obj.items()) {
    if (std::find(group.begin(), group.end(), name) == group.end())
      throw ValidationError("unknown " + what + " variable '" + name + "' in scenario");
    if (!value.is_number_integer() || (value.get<int>() != 0 && value.get<int>() != 1))
      throw ValidationError("scenario value for '" + name + "' must be 0 or 1");
    out[name] = value.get<int>();
  }
  return out;
}

}  // namespace

bool Dataset::has_column(const std::string& name) const {
  return std::find(column_names.begin(), column_names.end(), name) != column_names.end();
}

Eigen::Index Dataset::column_index(const std::string& name) const {
  auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end())
    throw ValidationError("dataset has no column '" + name + "'");
  return static_cast<Eigen::Index>(it - column_names.begin());
}

Eigen::VectorXd Dataset::column_as_double(const std::string& name) const {
  return values.col(column_index(name)).cast<double>();
}

Dataset read_csv(const std::string& path, const NetworkSpec& spec,
                 MissingPolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open data file '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("data file '" + path + "' is empty (no header row)");
  const std::vector<std::string> header = split_csv_line(strip_cr(line));

  std::vector<std::string> wanted;
  wanted.insert(wanted.end(), spec.diseases.begin(), spec.diseases.end());
  wanted.insert(wanted.end(), spec.symptoms.begin(), spec.symptoms.end());
  wanted.insert(wanted.end(), spec.factors.begin(), spec.factors.end());
  wanted.insert(wanted.end(), spec.covariates.begin(), spec.covariates.end());

  std::vector<std::size_t> source_index(wanted.size());
  std::vector<std::string> missing;
  for (std::size_t k = 0; k < wanted.size(); ++k) {
    auto it = std::find(header.begin(), header.end(), wanted[k]);
    if (it == header.end())
      missing.push_back(wanted[k]);
    else
      source_index[k] = static_cast<std::size_t>(it - header.begin());
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw ValidationError("data file '" + path + "' lacks required columns: " + names);
  }

  std::vector<std::uint8_t> cells;  // row-major staging
  std::int64_t n_rows = 0;
  std::int64_t dropped = 0;
  std::int64_t line_no = 1;
  std::vector<std::uint8_t> row(wanted.size());
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "row " << line_no << " has " << fields.size() << " cells, expected "
          << header.size();
      throw ValidationError(msg.str());
    }
    bool row_missing = false;
    for (std::size_t k = 0; k < wanted.size(); ++k) {
      const std::string& cell = fields[source_index[k]];
      if (cell == "0") {
        row[k] = 0;
      } else if (cell == "1") {
        row[k] = 1;
      } else if (cell.empty()) {
        row_missing = true;
        if (policy == MissingPolicy::fail) {
          std::ostringstream msg;
          msg << "missing value at row " << line_no << ", column '" << wanted[k] << "'";
          throw ValidationError(msg.str());
        }
      } else {
        std::ostringstream msg;
        msg << "non-binary cell '" << cell << "' at row " << line_no << ", column '"
            << wanted[k] << "'";
        throw ValidationError(msg.str());
      }
    }
    if (row_missing) {
      ++dropped;
      continue;
    }
    cells.insert(cells.end(), row.begin(), row.end());
    ++n_rows;
  }

  Dataset data;
  data.column_names = wanted;
  data.values.resize(n_rows, static_cast<Eigen::Index>(wanted.size()));
  for (std::int64_t i = 0; i < n_rows; ++i)
    for (std::size_t k = 0; k < wanted.size(); ++k)
      data.values(i, static_cast<Eigen::Index>(k)) =
          cells[static_cast<std::size_t>(i) * wanted.size() + k];
  data.provenance.source = path;
  data.provenance.dropped_rows = dropped;
  return data;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write data file '" + path + "'");
  for (std::size_t k = 0; k < data.column_names.size(); ++k) {
    if (k) out << ',';
    out << data.column_names[k];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    for (Eigen::Index k = 0; k < data.values.cols(); ++k) {
      if (k) out << ',';
      out << static_cast<int>(data.values(i, k));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing data file '" + path + "'");
}

std::vector<NamedScenario> read_scenarios(const std::string& path,
                                          const NetworkSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    std::cerr << "warning: scenario file '" << path << "' is empty\n";
    return {};
  }

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario parse error: ") + e.what());
  }
  if (!doc.is_array())
    throw ValidationError("scenario file must be a JSON array of scenario objects");
  if (doc.empty()) {
    std::cerr << "warning: scenario file '" << path << "' declares no scenarios\n";
    return {};
  }

  std::vector<NamedScenario> out;
  for (const auto& item : doc) {
    if (!item.is_object())
      throw ValidationError("each scenario must be a JSON object");
    for (const auto& [key, value] : item.items()) {
      (void)value;
      if (key != "name" && key != "covariates" && key != "factors" &&
          key != "symptoms" && key != "diseases")
        throw ValidationError("unknown scenario key '" + key + "'");
    }
    if (!item.contains("name") || !item.at("name").is_string())
      throw ValidationError("scenario is missing a string 'name'");
    Scenario s;
    s.covariate_values = binary_map(item.value("covariates", json()), spec,
                                    spec.covariates, "covariates");
    s.factor_values = binary_map(item.value("factors", json()), spec,
                                 spec.factors, "factors");
    s.symptom_values = binary_map(item.value("symptoms", json()), spec,
                                  spec.symptoms, "symptoms");
    s.disease_conditions = binary_map(item.value("diseases", json()), spec,
                                      spec.diseases, "diseases");
    out.emplace_back(item.at("name").get<std::string>(), std::move(s));
  }
  return out;
}

void write_scenarios(const std::vector<NamedScenario>& scenarios,
                     const std::string& path) {
  ordered_json doc = ordered_json::array();
  for (const auto& [name, s] : scenarios) {
    ordered_json item;
    item["name"] = name;
    item["covariates"] = s.covariate_values;
    item["factors"] = s.factor_values;
    if (!s.symptom_values.empty()) item["symptoms"] = s.symptom_values;
    if (!s.disease_conditions.empty()) item["diseases"] = s.disease_conditions;
    doc.push_back(item);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scenario file '" + path + "'");
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("failed writing scenario file '" + path + "'");
}

glm::DesignMatrix build_design(const Dataset& data,
                               const std::vector<std::string>& columns) {
  if (columns.empty() || columns[0] != kInterceptColumn)
    throw ValidationError("design columns must start with the intercept");
  glm::DesignMatrix X;
  X.column_names = columns;
  X.values.resize(data.n(), static_cast<Eigen::Index>(columns.size()));
  X.values.col(0).setOnes();
  for (std::size_t k = 1; k < columns.size(); ++k)
    X.values.col(static_cast<Eigen::Index>(k)) = data.column_as_double(columns[k]);
  return X;
}

}  // namespace comorbid
