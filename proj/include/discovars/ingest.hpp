#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace discovars {

/// Named dense numeric matrix: m rows (observations) by d columns (variables).
///
/// Invariants (checked by validate()): names are unique and non-empty, the
/// name count equals the column count, and every entry is finite.
struct DataTable {
  std::vector<std::string> names;
  Eigen::MatrixXd values;

  DataTable() = default;
  DataTable(std::vector<std::string> column_names, Eigen::MatrixXd data);

  [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  [[nodiscard]] std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;
  [[nodiscard]] std::size_t require_index(std::string_view name) const;

  /// Column subset in the requested order. Throws DataError on unknown names.
  [[nodiscard]] DataTable select(std::span<const std::string> column_names) const;
  [[nodiscard]] DataTable without(std::string_view column_name) const;

  void validate() const;

  friend bool operator==(const DataTable& a, const DataTable& b) {
    return a.names == b.names && a.values.rows() == b.values.rows() &&
           a.values.cols() == b.values.cols() && a.values == b.values;
  }
};

namespace ingest {

/// Raw cells of a delimiter-separated document, before numeric filtering.
struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC-4180 style parsing: comma delimiter, double-quote quoting with ""
/// escapes, CRLF or LF line endings. Every row must have the header's width.
CsvDocument parse_csv(std::string_view text, bool header = true);

struct ColumnWarning {
  std::string column;
  std::string reason;
};

struct LoadResult {
  DataTable table;
  std::vector<ColumnWarning> dropped_columns;
  std::size_t dropped_rows = 0;
};

/// Builds a numeric table. A column is kept iff every non-missing cell parses
/// as a finite real; "", "NA", "NaN" and "null" count as missing. Rows with a
/// missing value in any kept column are removed.
LoadResult load_csv(std::string_view text, bool header = true);
LoadResult load_csv(const CsvDocument& doc);
LoadResult load_csv_file(const std::filesystem::path& path, bool header = true);

std::string read_file(const std::filesystem::path& path);

struct ConstantDropResult {
  DataTable table;
  std::vector<std::string> dropped;
};

/// Removes columns whose sample variance is at or below 1e-12.
ConstantDropResult drop_constant_columns(const DataTable& table);

/// Per-column location and (population) scale used by standardize().
struct StandardizationRecord {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

std::pair<DataTable, StandardizationRecord> standardize(const DataTable& table);
DataTable unstandardize(const DataTable& table, const StandardizationRecord& record);

enum class ReturnDenominator { current, previous };

/// Daily returns r_t = (v_t - v_{t-1}) / v_t (or / v_{t-1} with
/// ReturnDenominator::previous) plus `lags` shifted copies per column.
/// Output columns per input SYM: SYM_RTN, SYM_RTN_LG1, ..., SYM_RTN_LG<lags>.
DataTable compute_returns(const DataTable& prices, int lags,
                          ReturnDenominator denominator = ReturnDenominator::current);

/// Throws DataError unless the named column holds strictly ascending
/// ISO-8601 dates (YYYY-MM-DD prefix).
void require_ascending_dates(const CsvDocument& doc, std::string_view date_column);

std::string to_csv(const DataTable& table);

}  // namespace ingest
}  // namespace discovars
