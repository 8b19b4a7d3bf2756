#include "discovars/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "discovars/error.hpp"

namespace discovars {

DataTable::DataTable(std::vector<std::string> column_names, Eigen::MatrixXd data)
    : names(std::move(column_names)), values(std::move(data)) {
  if (names.size() != cols()) {
    throw DataError("column name count " + std::to_string(names.size()) +
                    " does not match column count " + std::to_string(cols()));
  }
}

std::optional<std::size_t> DataTable::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

std::size_t DataTable::require_index(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) throw DataError("unknown column '" + std::string(name) + "'");
  return *idx;
}

DataTable DataTable::select(std::span<const std::string> column_names) const {
  Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(column_names.size()));
  for (std::size_t j = 0; j < column_names.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) =
        values.col(static_cast<Eigen::Index>(require_index(column_names[j])));
  }
  return DataTable({column_names.begin(), column_names.end()}, std::move(out));
}

DataTable DataTable::without(std::string_view column_name) const {
  std::vector<std::string> keep;
  for (const auto& n : names) {
    if (n != column_name) keep.push_back(n);
  }
  return select(keep);
}

void DataTable::validate() const {
  if (names.size() != cols()) throw DataError("column name count mismatch");
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw DataError("empty column name");
    if (!seen.insert(n).second) throw DataError("duplicate column name '" + n + "'");
  }
  if (!values.allFinite()) throw DataError("table contains non-finite values");
}

namespace ingest {
namespace {

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_missing(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null";
}

std::optional<double> parse_real(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::vector<std::string>> split_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = record.size() == 1 && trim(record.front()).empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started || trim(field).empty()) {
          field.clear();
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

CsvDocument parse_csv(std::string_view text, bool header) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  auto records = split_records(text);
  if (records.empty()) throw DataError("empty input");

  CsvDocument doc;
  std::size_t width = records.front().size();
  if (header) {
    for (auto& h : records.front()) doc.header.emplace_back(trim(h));
    records.erase(records.begin());
  } else {
    for (std::size_t j = 0; j < width; ++j) doc.header.push_back("V" + std::to_string(j + 1));
  }
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() != width) {
      throw DataError("row " + std::to_string(r + 1) + " has " +
                      std::to_string(records[r].size()) + " fields, expected " +
                      std::to_string(width));
    }
  }
  doc.rows = std::move(records);
  return doc;
}

LoadResult load_csv(const CsvDocument& doc) {
  const std::size_t width = doc.header.size();
  LoadResult result;

  std::vector<std::size_t> kept;
  std::unordered_set<std::string> names_seen;
  for (std::size_t j = 0; j < width; ++j) {
    const std::string& name = doc.header[j];
    if (name.empty()) {
      result.dropped_columns.push_back({"#" + std::to_string(j + 1), "empty column name"});
      continue;
    }
    bool any_value = false;
    bool numeric = true;
    for (const auto& row : doc.rows) {
      if (is_missing(row[j])) continue;
      any_value = true;
      if (!parse_real(row[j])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      result.dropped_columns.push_back({name, "non-numeric"});
    } else if (!any_value) {
      result.dropped_columns.push_back({name, "no values"});
    } else if (!names_seen.insert(name).second) {
      result.dropped_columns.push_back({name, "duplicate column name"});
    } else {
      kept.push_back(j);
    }
  }
  if (kept.empty()) throw DataError("no numeric columns");

  std::vector<std::size_t> good_rows;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    bool complete = std::none_of(kept.begin(), kept.end(),
                                 [&](std::size_t j) { return is_missing(doc.rows[r][j]); });
    if (complete) good_rows.push_back(r);
  }
  result.dropped_rows = doc.rows.size() - good_rows.size();
  if (good_rows.size() < 2) {
    throw DataError("fewer than 2 complete rows after cleaning (" +
                    std::to_string(good_rows.size()) + ")");
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(good_rows.size()),
                         static_cast<Eigen::Index>(kept.size()));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < kept.size(); ++c) {
    names.push_back(doc.header[kept[c]]);
    for (std::size_t r = 0; r < good_rows.size(); ++r) {
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          *parse_real(doc.rows[good_rows[r]][kept[c]]);
    }
  }
  result.table = DataTable(std::move(names), std::move(values));
  result.table.validate();
  return result;
}

LoadResult load_csv(std::string_view text, bool header) {
  return load_csv(parse_csv(text, header));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadResult load_csv_file(const std::filesystem::path& path, bool header) {
  return load_csv(read_file(path), header);
}

ConstantDropResult drop_constant_columns(const DataTable& table) {
  ConstantDropResult out;
  std::vector<std::string> keep;
  const auto m = table.values.rows();
  for (std::size_t j = 0; j < table.cols(); ++j) {
    auto col = table.values.col(static_cast<Eigen::Index>(j));
    double var = 0.0;
    if (m > 1) {
      double mean = col.mean();
      var = (col.array() - mean).square().sum() / static_cast<double>(m - 1);
    }
    if (var > 1e-12) keep.push_back(table.names[j]);
    else out.dropped.push_back(table.names[j]);
  }
  if (keep.empty()) throw DataError("all columns are constant");
  out.table = table.select(keep);
  return out;
}

std::pair<DataTable, StandardizationRecord> standardize(const DataTable& table) {
  const auto m = table.values.rows();
  const auto d = table.values.cols();
  if (m < 2) throw DataError("standardize needs at least 2 rows");
  StandardizationRecord rec{Eigen::VectorXd(d), Eigen::VectorXd(d)};
  Eigen::MatrixXd z(m, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    auto col = table.values.col(j);
    double mean = col.mean();
    Eigen::VectorXd centered = col.array() - mean;
    double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(m));
    if (!(sd * sd * static_cast<double>(m) / static_cast<double>(m - 1) > 1e-12)) {
      throw DataError("cannot standardize constant column '" +
                      table.names[static_cast<std::size_t>(j)] + "'");
    }
    z.col(j) = centered / sd;
    // second pass removes residual rounding in the mean
    double residual = z.col(j).mean();
    z.col(j).array() -= residual;
    rec.mean(j) = mean;
    rec.stddev(j) = sd;
  }
  return {DataTable(table.names, std::move(z)), std::move(rec)};
}

DataTable unstandardize(const DataTable& table, const StandardizationRecord& record) {
  if (record.mean.size() != table.values.cols() || record.stddev.size() != table.values.cols()) {
    throw ArgumentError("standardization record does not match table width");
  }
  Eigen::MatrixXd x = table.values;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    x.col(j) = x.col(j).array() * record.stddev(j) + record.mean(j);
  }
  return DataTable(table.names, std::move(x));
}

DataTable compute_returns(const DataTable& prices, int lags, ReturnDenominator denominator) {
  if (lags < 0) throw ArgumentError("lags must be >= 0");
  const auto rows = prices.values.rows();
  const auto syms = prices.values.cols();
  if (rows < lags + 2) {
    throw DataError("need at least " + std::to_string(lags + 2) + " price rows, got " +
                    std::to_string(rows));
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < syms; ++c) {
      if (!(prices.values(r, c) > 0.0)) {
        throw DataError("non-positive price in column '" +
                        prices.names[static_cast<std::size_t>(c)] + "' at row " +
                        std::to_string(r + 1));
      }
    }
  }

  const Eigen::Index out_rows = rows - 1 - lags;
  const Eigen::Index width = syms * (lags + 1);
  Eigen::MatrixXd out(out_rows, width);
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(width));

  for (Eigen::Index c = 0; c < syms; ++c) {
    // ret(t) for t = 1..rows-1 is stored at index t-1
    Eigen::VectorXd ret(rows - 1);
    for (Eigen::Index t = 1; t < rows; ++t) {
      double now = prices.values(t, c);
      double before = prices.values(t - 1, c);
      double denom = denominator == ReturnDenominator::current ? now : before;
      ret(t - 1) = (now - before) / denom;
    }
    const std::string& sym = prices.names[static_cast<std::size_t>(c)];
    for (int lag = 0; lag <= lags; ++lag) {
      Eigen::Index col = c * (lags + 1) + lag;
      for (Eigen::Index r = 0; r < out_rows; ++r) {
        // output row r corresponds to t = r + 1 + lags
        out(r, col) = ret(r + lags - lag);
      }
      names.push_back(lag == 0 ? sym + "_RTN" : sym + "_RTN_LG" + std::to_string(lag));
    }
  }
  return DataTable(std::move(names), std::move(out));
}

void require_ascending_dates(const CsvDocument& doc, std::string_view date_column) {
  auto it = std::find(doc.header.begin(), doc.header.end(), date_column);
  if (it == doc.header.end()) {
    throw DataError("date column '" + std::string(date_column) + "' not found");
  }
  const auto j = static_cast<std::size_t>(it - doc.header.begin());
  auto iso = [](std::string_view s) {
    s = trim(s);
    if (s.size() < 10) return false;
    for (std::size_t i = 0; i < 10; ++i) {
      bool digit = s[i] >= '0' && s[i] <= '9';
      if ((i == 4 || i == 7) ? s[i] != '-' : !digit) return false;
    }
    return true;
  };
  std::string_view prev;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    std::string_view cur = trim(doc.rows[r][j]);
    if (!iso(cur)) {
      throw DataError("row " + std::to_string(r + 1) + ": '" + std::string(cur) +
                      "' is not an ISO-8601 date");
    }
    if (r > 0 && !(prev < cur)) {
      throw DataError("row " + std::to_string(r + 1) + ": dates not strictly ascending");
    }
    prev = cur;
  }
}

std::string to_csv(const DataTable& table) {
  std::string out;
  for (std::size_t j = 0; j < table.cols(); ++j) {
    if (j) out.push_back(',');
    out += quote_if_needed(table.names[j]);
  }
  out.push_back('\n');
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      if (c) out.push_back(',');
      out += format_real(table.values(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace ingest
}  // namespace discovars
