#pragma once

// MOOT-format tabular data: header conventions, typed cells, column
// statistics, normalization and row distance.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

namespace frugal {

using RowId = std::size_t;

enum class Kind { Numeric, Symbolic };
enum class Role { Independent, Goal, Ignored };
enum class Direction { Minimize, Maximize, None };
enum class Dims { Low, Medium, High };

inline const char* to_string(Dims d) {
  switch (d) {
    case Dims::Low: return "low";
    case Dims::Medium: return "medium";
    case Dims::High: return "high";
  }
  return "?";
}

inline std::optional<Dims> parse_dims(std::string_view s) {
  if (s == "low") return Dims::Low;
  if (s == "medium") return Dims::Medium;
  if (s == "high") return Dims::High;
  return std::nullopt;
}

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ColumnSpec {
  std::string name;
  std::size_t index = 0;  // position in the CSV header
  Kind kind = Kind::Numeric;
  Role role = Role::Independent;
  Direction direction = Direction::None;
};

struct NumStats {
  std::size_t n = 0;
  double lo = 0, hi = 0, mean = 0, sd = 0, median = 0;
};

struct SymStats {
  std::size_t n = 0;
  std::string mode;
  std::map<std::string, std::size_t> freq;
};

using ColumnStats = std::variant<NumStats, SymStats>;

/// A cell is missing, a number, or a symbol.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }

struct Row {
  RowId id = 0;
  std::vector<Cell> x;    // one per independent column
  std::vector<double> y;  // one per goal column; read only through Labels
};

// ---------------------------------------------------------------------------
// header

/// Leading uppercase = numeric; trailing '+'/'-' = goal to maximize/minimize;
/// trailing 'X' = ignored; everything else is an independent column.
inline std::vector<ColumnSpec> parse_header(const std::vector<std::string>& names) {
  if (names.empty()) throw DataError("header: no columns");
  std::unordered_set<std::string> seen;
  std::vector<ColumnSpec> cols;
  cols.reserve(names.size());
  std::size_t goals = 0, xs = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& name = names[i];
    if (name.empty()) throw DataError("header: empty column name at position " + std::to_string(i));
    if (!seen.insert(name).second) throw DataError("header: duplicate column name '" + name + "'");
    ColumnSpec c;
    c.name = name;
    c.index = i;
    c.kind = std::isupper(static_cast<unsigned char>(name.front())) ? Kind::Numeric : Kind::Symbolic;
    const char last = name.back();
    if (last == '+' || last == '-') {
      if (c.kind == Kind::Symbolic)
        throw DataError("header: goal column '" + name + "' must be numeric (leading uppercase)");
      c.role = Role::Goal;
      c.direction = last == '+' ? Direction::Maximize : Direction::Minimize;
      ++goals;
    } else if (last == 'X') {
      c.role = Role::Ignored;
    } else {
      ++xs;
    }
    cols.push_back(std::move(c));
  }
  if (goals == 0) throw DataError("header: zero goal columns (last column '" + names.back() + "')");
  if (xs == 0) throw DataError("header: zero independent columns (first column '" + names.front() + "')");
  return cols;
}

inline Dims classify_dims(std::size_t n_independent) {
  if (n_independent < 6) return Dims::Low;
  if (n_independent <= 11) return Dims::Medium;
  return Dims::High;
}

// ---------------------------------------------------------------------------
// csv

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Reads one CSV record (RFC 4180 quoting). Returns false at end of input.
inline bool read_record(std::istream& in, std::vector<std::string>& out, std::size_t& line_no) {
  out.clear();
  std::string line;
  while (true) {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) break;
  }
  std::string cell;
  bool quoted = false, was_quoted = false;
  for (std::size_t i = 0;; ++i) {
    if (i == line.size()) {
      if (quoted) {
        // embedded newline inside quotes
        std::string more;
        if (!std::getline(in, more)) throw DataError("csv: unterminated quote at line " + std::to_string(line_no));
        ++line_no;
        if (!more.empty() && more.back() == '\r') more.pop_back();
        cell += '\n';
        line = std::move(more);
        i = static_cast<std::size_t>(-1);
        continue;
      }
      out.push_back(was_quoted ? cell : trim(cell));
      break;
    }
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = was_quoted = true;
      cell = trim(cell);
    } else if (ch == ',') {
      out.push_back(was_quoted ? cell : trim(cell));
      cell.clear();
      was_quoted = false;
    } else {
      cell += ch;
    }
  }
  return true;
}

inline std::optional<double> to_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// dataset

class Dataset {
 public:
  Dataset() = default;

  /// Builds a dataset from a header and raw string cells (one vector per record).
  static Dataset from_records(std::string name, const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& records) {
    Dataset ds;
    ds.name_ = std::move(name);
    ds.columns_ = parse_header(header);
    for (std::size_t c = 0; c < ds.columns_.size(); ++c) {
      if (ds.columns_[c].role == Role::Independent) ds.x_cols_.push_back(c);
      if (ds.columns_[c].role == Role::Goal) ds.y_cols_.push_back(c);
    }
    ds.rows_.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
      const auto& rec = records[r];
      if (rec.size() != header.size())
        throw DataError("csv: ragged row " + std::to_string(r + 1) + " has " + std::to_string(rec.size()) +
                        " cells, header has " + std::to_string(header.size()));
      Row row;
      row.id = r;
      row.x.reserve(ds.x_cols_.size());
      for (std::size_t c : ds.x_cols_) row.x.push_back(ds.parse_cell(c, rec[c], r));
      row.y.reserve(ds.y_cols_.size());
      for (std::size_t c : ds.y_cols_) {
        Cell v = ds.parse_cell(c, rec[c], r);
        if (is_missing(v))
          throw DataError("csv: row " + std::to_string(r + 1) + " has a missing goal value in '" +
                          ds.columns_[c].name + "'");
        row.y.push_back(std::get<double>(v));
      }
      ds.raw_.push_back(rec);
      ds.rows_.push_back(std::move(row));
    }
    ds.compute_stats();
    return ds;
  }

  static Dataset load(std::istream& in, std::string name) {
    std::vector<std::string> header;
    std::size_t line_no = 0;
    if (!detail::read_record(in, header, line_no)) throw DataError("csv: empty input");
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    while (detail::read_record(in, rec, line_no)) {
      if (rec.size() != header.size())
        throw DataError("csv: ragged row at line " + std::to_string(line_no) + " (" + std::to_string(rec.size()) +
                        " cells, header has " + std::to_string(header.size()) + ")");
      records.push_back(rec);
    }
    return from_records(std::move(name), header, records);
  }

  static Dataset load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open data file '" + path.string() + "'");
    return load(in, path.stem().string());
  }

  const std::string& name() const { return name_; }
  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const std::vector<Row>& rows() const { return rows_; }
  const Row& row(RowId id) const { return rows_.at(id); }
  std::size_t size() const { return rows_.size(); }

  /// Column indices (into columns()) of the independent and goal columns.
  const std::vector<std::size_t>& x_columns() const { return x_cols_; }
  const std::vector<std::size_t>& y_columns() const { return y_cols_; }
  const ColumnSpec& x_spec(std::size_t j) const { return columns_[x_cols_[j]]; }
  const ColumnSpec& y_spec(std::size_t j) const { return columns_[y_cols_[j]]; }

  const ColumnStats& stats(std::size_t column) const { return stats_[column]; }
  const NumStats& num_stats(std::size_t column) const { return std::get<NumStats>(stats_[column]); }
  const SymStats& sym_stats(std::size_t column) const { return std::get<SymStats>(stats_[column]); }

  Dims dims() const { return classify_dims(x_cols_.size()); }

  /// Serializes back to MOOT CSV (cells as originally written, '?' for missing).
  void write_csv(std::ostream& out) const {
    for (std::size_t c = 0; c < columns_.size(); ++c)
      out << (c ? "," : "") << detail::quote_if_needed(columns_[c].name);
    out << '\n';
    for (const auto& rec : raw_) {
      for (std::size_t c = 0; c < rec.size(); ++c) out << (c ? "," : "") << detail::quote_if_needed(rec[c]);
      out << '\n';
    }
  }

 private:
  Cell parse_cell(std::size_t c, const std::string& s, std::size_t r) const {
    if (s == "?" || s.empty()) return std::monostate{};
    if (columns_[c].kind == Kind::Symbolic || columns_[c].role == Role::Ignored) {
      if (columns_[c].kind == Kind::Numeric) {
        if (auto v = detail::to_number(s)) return *v;
        return s;
      }
      return s;
    }
    auto v = detail::to_number(s);
    if (!v)
      throw DataError("csv: row " + std::to_string(r + 1) + " column '" + columns_[c].name + "': '" + s +
                      "' is not a number");
    return *v;
  }

  void compute_stats() {
    stats_.clear();
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (columns_[c].kind == Kind::Numeric) {
        std::vector<double> vs;
        vs.reserve(raw_.size());
        for (const auto& rec : raw_)
          if (auto v = detail::to_number(rec[c])) vs.push_back(*v);
        stats_.emplace_back(summarize(vs));
      } else {
        SymStats s;
        for (const auto& rec : raw_) {
          if (rec[c] == "?" || rec[c].empty()) continue;
          ++s.freq[rec[c]];
          ++s.n;
        }
        std::size_t best = 0;
        for (const auto& [k, n] : s.freq)
          if (n > best) best = n, s.mode = k;
        stats_.emplace_back(std::move(s));
      }
    }
  }

 public:
  /// lo, hi, mean, sample sd, median of a list of numbers.
  static NumStats summarize(std::vector<double> vs) {
    NumStats s;
    s.n = vs.size();
    if (vs.empty()) return s;
    std::sort(vs.begin(), vs.end());
    s.lo = vs.front();
    s.hi = vs.back();
    double sum = 0;
    for (double v : vs) sum += v;
    s.mean = std::clamp(sum / static_cast<double>(vs.size()), s.lo, s.hi);
    double ss = 0;
    for (double v : vs) ss += (v - s.mean) * (v - s.mean);
    s.sd = vs.size() > 1 ? std::sqrt(ss / static_cast<double>(vs.size() - 1)) : 0.0;
    const std::size_t m = vs.size() / 2;
    s.median = vs.size() % 2 ? vs[m] : 0.5 * (vs[m - 1] + vs[m]);
    return s;
  }

 private:
  std::string name_;
  std::vector<ColumnSpec> columns_;
  std::vector<std::size_t> x_cols_, y_cols_;
  std::vector<Row> rows_;
  std::vector<std::vector<std::string>> raw_;
  std::vector<ColumnStats> stats_;
};

/// Maps v into [0,1] using the column's lo/hi; degenerate columns map to 0.5.
inline double norm(const NumStats& s, double v) {
  if (!(s.hi > s.lo)) return 0.5;
  return std::clamp((v - s.lo) / (s.hi - s.lo), 0.0, 1.0);
}

/// Per-column distance in [0,1] between two cells of independent column j.
inline double cell_distance(const Dataset& ds, std::size_t j, const Cell& a, const Cell& b) {
  if (is_missing(a) || is_missing(b)) return 1.0;
  const std::size_t c = ds.x_columns()[j];
  if (ds.columns()[c].kind == Kind::Numeric) {
    const auto& s = ds.num_stats(c);
    return std::abs(norm(s, std::get<double>(a)) - norm(s, std::get<double>(b)));
  }
  return std::get<std::string>(a) == std::get<std::string>(b) ? 0.0 : 1.0;
}

/// Euclidean distance over independent columns of two x vectors.
inline double x_distance(const std::vector<Cell>& a, const std::vector<Cell>& b, const Dataset& ds) {
  double d2 = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = cell_distance(ds, j, a[j], b[j]);
    d2 += d * d;
  }
  return std::sqrt(d2);
}

inline double x_distance(const Row& a, const Row& b, const Dataset& ds) { return x_distance(a.x, b.x, ds); }

// ---------------------------------------------------------------------------
// label state

/// Per-run record of which rows have had their goals revealed. Every label()
/// that flips a row from unlabeled to labeled costs one evaluation.
class Labels {
 public:
  explicit Labels(const Dataset& ds) : ds_(&ds), labeled_(ds.size(), false) {}

  /// Reveals the goals of a row. Returns false if it was already labeled.
  bool label(RowId id) {
    if (labeled_.at(id)) return false;
    labeled_[id] = true;
    order_.push_back(id);
    return true;
  }

  bool is_labeled(RowId id) const { return labeled_.at(id); }
  std::size_t evaluations() const { return order_.size(); }

  /// Labeled rows in labeling order.
  const std::vector<RowId>& labeled() const { return order_; }

  std::vector<RowId> unlabeled() const {
    std::vector<RowId> out;
    out.reserve(labeled_.size() - order_.size());
    for (RowId i = 0; i < labeled_.size(); ++i)
      if (!labeled_[i]) out.push_back(i);
    return out;
  }

  std::size_t count_labeled() const { return static_cast<std::size_t>(std::count(labeled_.begin(), labeled_.end(), true)); }

  const std::vector<double>& goals(RowId id) const {
    if (!labeled_.at(id)) throw std::logic_error("goals of unlabeled row " + std::to_string(id) + " requested");
    return ds_->row(id).y;
  }

  const Dataset& dataset() const { return *ds_; }

 private:
  const Dataset* ds_;
  std::vector<bool> labeled_;
  std::vector<RowId> order_;
};

}  // namespace frugal
