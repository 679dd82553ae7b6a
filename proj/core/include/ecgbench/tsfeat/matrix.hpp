#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ecgbench/tsfeat/features.hpp"

namespace ecgbench::tsfeat {

// Records x features. Missing cells are NaN until impute_and_prune runs.
struct FeatureMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> rows;

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_cols() const { return column_names.size(); }
};

// Stacks per-record vectors; every vector must carry identical names in
// identical order (they come from the same spec grid).
FeatureMatrix build_matrix(const std::vector<std::string>& record_ids,
                           const std::vector<FeatureVector>& vectors);

// Replaces missing cells with `fill`, then drops columns whose population
// variance is <= variance_floor. Column order is otherwise preserved.
// Raises EmptyMatrixError when nothing survives.
FeatureMatrix impute_and_prune(const FeatureMatrix& matrix,
                               double fill = -999.0,
                               double variance_floor = 1e-12);

// CSV persistence: header "record_id,<col>,..."; missing cells serialize as
// empty fields and read back as NaN.
void save_matrix_csv(const FeatureMatrix& matrix,
                     const std::filesystem::path& path);
FeatureMatrix load_matrix_csv(const std::filesystem::path& path);

}  // namespace ecgbench::tsfeat
