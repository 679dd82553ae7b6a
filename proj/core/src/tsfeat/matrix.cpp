#include "ecgbench/tsfeat/matrix.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "ecgbench/errors.hpp"
#include "ecgbench/util/csv.hpp"

namespace ecgbench::tsfeat {

FeatureMatrix build_matrix(const std::vector<std::string>& record_ids,
                           const std::vector<FeatureVector>& vectors) {
  if (record_ids.size() != vectors.size()) {
    throw DataError("record id count does not match vector count");
  }
  if (vectors.empty()) throw DataError("no feature vectors");

  FeatureMatrix matrix;
  matrix.row_ids = record_ids;
  matrix.column_names = vectors.front().names;
  matrix.rows.reserve(vectors.size());
  for (const FeatureVector& vec : vectors) {
    if (vec.names != matrix.column_names) {
      throw DataError("feature vectors have mismatched column names");
    }
    std::vector<double> row;
    row.reserve(vec.values.size());
    for (const auto& value : vec.values) {
      row.push_back(
          value ? *value : std::numeric_limits<double>::quiet_NaN());
    }
    matrix.rows.push_back(std::move(row));
  }
  return matrix;
}

FeatureMatrix impute_and_prune(const FeatureMatrix& matrix, double fill,
                               double variance_floor) {
  const std::size_t cols = matrix.num_cols();
  for (const auto& row : matrix.rows) {
    if (row.size() != cols) throw DataError("matrix is not rectangular");
  }
  const std::size_t n = matrix.num_rows();
  if (n == 0) throw DataError("matrix has no rows");

  std::vector<std::vector<double>> filled = matrix.rows;
  for (auto& row : filled) {
    for (double& v : row) {
      if (std::isnan(v)) v = fill;
    }
  }

  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < cols; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += filled[r][c];
    mean /= static_cast<double>(n);
    double variance = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      variance += (filled[r][c] - mean) * (filled[r][c] - mean);
    }
    variance /= static_cast<double>(n);
    if (variance > variance_floor) kept.push_back(c);
  }
  if (kept.empty()) {
    throw EmptyMatrixError("every feature column was pruned");
  }

  FeatureMatrix out;
  out.row_ids = matrix.row_ids;
  out.column_names.reserve(kept.size());
  for (std::size_t c : kept) out.column_names.push_back(matrix.column_names[c]);
  out.rows.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> row;
    row.reserve(kept.size());
    for (std::size_t c : kept) row.push_back(filled[r][c]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

void save_matrix_csv(const FeatureMatrix& matrix,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write matrix: " + path.string());
  out << "record_id";
  for (const std::string& name : matrix.column_names) {
    out << ',' << csv_escape(name);
  }
  out << '\n';
  for (std::size_t r = 0; r < matrix.num_rows(); ++r) {
    out << csv_escape(matrix.row_ids[r]);
    for (double v : matrix.rows[r]) {
      out << ',';
      if (!std::isnan(v)) out << format_double(v);
    }
    out << '\n';
  }
}

FeatureMatrix load_matrix_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty() || rows.front().empty() ||
      rows.front().front() != "record_id") {
    throw ParseError("matrix CSV must start with a record_id header");
  }
  FeatureMatrix matrix;
  matrix.column_names.assign(rows.front().begin() + 1, rows.front().end());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    if (cells.size() != matrix.column_names.size() + 1) {
      throw ParseError("matrix row " + std::to_string(r + 1) +
                       " has wrong column count");
    }
    matrix.row_ids.push_back(cells.front());
    std::vector<double> row;
    row.reserve(cells.size() - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      row.push_back(cells[c].empty()
                        ? std::numeric_limits<double>::quiet_NaN()
                        : parse_double(cells[c]));
    }
    matrix.rows.push_back(std::move(row));
  }
  return matrix;
}

}  // namespace ecgbench::tsfeat
