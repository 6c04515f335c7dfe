#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "comorbid/glm.hpp"
#include "comorbid/model_spec.hpp"

namespace comorbid {

// Column-typed table of binary observations.
struct Dataset {
  std::vector<std::string> column_names;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> values;  // n x k

  struct Provenance {
    std::string source;
    std::int64_t dropped_rows = 0;
  } provenance;

  Eigen::Index n() const { return values.rows(); }

  bool has_column(const std::string& name) const;
  Eigen::Index column_index(const std::string& name) const;  // throws if absent
  Eigen::VectorXd column_as_double(const std::string& name) const;
};

enum class MissingPolicy { drop_row, fail };

// Reads a CSV and retains exactly the columns declared in the spec, in spec
// declaration order (diseases, symptoms, factors, covariates). Cells must be
// `0`, `1` or empty; an empty cell triggers the missing policy.
Dataset read_csv(const std::string& path, const NetworkSpec& spec,
                 MissingPolicy policy = MissingPolicy::drop_row);

// Header then rows, `\n` line endings, no trailing delimiter; byte-stable.
void write_csv(const Dataset& data, const std::string& path);

// Scenario file: JSON array of {name, covariates, factors, symptoms, diseases}
// with the last two optional. Unset symptoms stay unset (generative queries
// marginalize them).
std::vector<NamedScenario> read_scenarios(const std::string& path,
                                          const NetworkSpec& spec);
void write_scenarios(const std::vector<NamedScenario>& scenarios,
                     const std::string& path);

// Design matrix for the given column list; columns[0] must be the intercept,
// every other name must be a dataset column.
glm::DesignMatrix build_design(const Dataset& data,
                               const std::vector<std::string>& columns);

}  // namespace comorbid
