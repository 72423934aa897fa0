#pragma once

// Cold starts and few-shot warm starts: build the prompt from a handful of
// labeled rows, have a synthesizer invent better/poorer x values, map those
// back onto real rows and label them.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "frugal/dataset.hpp"
#include "frugal/objective.hpp"
#include "frugal/random.hpp"

namespace frugal {

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Claim { Better, Poorer };

struct SyntheticRow {
  std::vector<Cell> x;  // one per independent column, never missing
  Claim claim = Claim::Better;

  bool operator==(const SyntheticRow&) const = default;
};

struct PromptBundle {
  std::string system;
  std::string examples;
  std::string task;

  /// The (role, content) pairs sent to a chat endpoint.
  std::vector<std::pair<std::string, std::string>> messages() const {
    return {{"system", system}, {"user", examples + "\n" + task}};
  }
};

/// Everything a synthesizer may look at: the rendered prompt plus the
/// structured rows it was rendered from.
struct SynthesisRequest {
  const Dataset& ds;
  const Labels& labels;
  std::vector<RowId> e0;  // ascending Chebyshev
  PromptBundle prompt;
};

class Synthesizer {
 public:
  virtual ~Synthesizer() = default;
  /// Two better then two poorer rows, or throws SynthesisError.
  virtual std::vector<SyntheticRow> synthesize(const SynthesisRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// cold start

inline std::vector<RowId> cold_start(Labels& labels, std::size_t b0, Rng& rng) {
  const auto pool = labels.unlabeled();
  if (b0 > pool.size())
    throw std::invalid_argument("cold start: b0=" + std::to_string(b0) + " exceeds " + std::to_string(pool.size()) +
                                " available rows");
  std::vector<RowId> picked;
  for (std::size_t i : rng.sample_without_replacement(pool.size(), b0)) {
    labels.label(pool[i]);
    picked.push_back(pool[i]);
  }
  return picked;
}

// ---------------------------------------------------------------------------
// markdown

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return fmt(*d);
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return "?";
}

inline std::string md_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

inline std::string md_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out = md_row(header);
  out += "|";
  for (std::size_t i = 0; i < header.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& r : rows) out += md_row(r);
  return out;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::vector<std::string> split_md_row(const std::string& line) {
  std::string t = trim(line);
  if (!t.empty() && t.front() == '|') t.erase(t.begin());
  if (!t.empty() && t.back() == '|') t.pop_back();
  std::vector<std::string> cells;
  std::string cur;
  for (char c : t) {
    if (c == '|') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  for (auto& c : cells) {
    // drop markdown emphasis around values: **x**, `x`
    while (c.size() >= 2 && (c.front() == '*' || c.front() == '`' || c.front() == '_') && c.back() == c.front())
      c = c.substr(1, c.size() - 2);
  }
  return cells;
}

inline bool is_separator_row(const std::vector<std::string>& cells) {
  for (const auto& c : cells) {
    if (c.empty()) return false;
    for (char ch : c)
      if (ch != '-' && ch != ':' && ch != ' ') return false;
  }
  return true;
}

}  // namespace detail

inline std::string meta_table(const Dataset& ds) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& col : ds.columns()) {
    if (col.role == Role::Ignored) continue;
    const std::string role = col.role == Role::Goal
                                 ? (col.direction == Direction::Maximize ? "goal (maximize)" : "goal (minimize)")
                                 : "feature";
    if (col.kind == Kind::Numeric) {
      const auto& s = ds.num_stats(col.index);
      rows.push_back({col.name, "NUM", role, detail::fmt(s.median), detail::fmt(s.sd), detail::fmt(s.lo),
                      detail::fmt(s.hi), "", ""});
    } else {
      const auto& s = ds.sym_stats(col.index);
      std::string freqs;
      for (const auto& [k, n] : s.freq) freqs += (freqs.empty() ? "" : ", ") + k + ": " + std::to_string(n);
      rows.push_back({col.name, "SYM", role, "", "", "", "", s.mode, freqs});
    }
  }
  return detail::md_table({"Name", "Type", "Role", "Median", "Std", "Low", "High", "Mode", "Frequencies"}, rows);
}

/// Independent-column table with a trailing Class column (tags per row).
inline std::string rows_to_markdown(const Dataset& ds, const std::vector<std::vector<Cell>>& xs,
                                    const std::vector<std::string>& tags) {
  std::vector<std::string> header;
  for (std::size_t j = 0; j < ds.x_columns().size(); ++j) header.push_back(ds.x_spec(j).name);
  header.push_back("Class");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<std::string> r;
    for (const auto& c : xs[i]) r.push_back(detail::cell_text(c));
    r.push_back(tags[i]);
    rows.push_back(std::move(r));
  }
  return detail::md_table(header, rows);
}

inline constexpr const char* kSystemPreamble =
    "You are given a dataset with several features. The rows have been categorized into \"Best\" and \"Rest\" "
    "examples based on their overall performance. Below are the key features and their descriptions from the "
    "dataset:\n\n";

inline constexpr const char* kTaskText =
    "Task:\n"
    "1. Generate Two New Examples that are Better:\n"
    "These should outperform the given \"Best\" examples by optimizing the relevant features to better "
    "combinations.\n\n"
    "2. Generate Two New Examples that are Poorer:\n"
    "These should under perform the given \"Rest\" examples by modifying the relevant features to worse "
    "combinations.\n\n"
    "Consider the inter-dependencies between features, and ensure that the generated examples follow logical "
    "consistency within the dataset's context.\n\n"
    "Return the output in the same markdown structure:\n";

/// e0 must be sorted ascending by Chebyshev; tags follow the sqrt(N) split.
inline PromptBundle build_prompt(const std::vector<RowId>& e0, const Dataset& ds) {
  if (e0.size() < 2) throw std::invalid_argument("build_prompt needs at least 2 labeled rows");
  PromptBundle p;
  p.system = std::string(kSystemPreamble) + meta_table(ds);
  const std::size_t k = best_size(e0.size());
  std::vector<std::vector<Cell>> xs;
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < e0.size(); ++i) {
    xs.push_back(ds.row(e0[i]).x);
    tags.push_back(i < k ? "Best" : "Rest");
  }
  p.examples = "Given Examples:\n\n" + rows_to_markdown(ds, xs, tags);
  p.task = kTaskText;
  return p;
}

/// Renders synthetic rows as a response would: Better and Poorer sections.
inline std::string render_response(const Dataset& ds, const std::vector<SyntheticRow>& rows) {
  std::string out;
  for (Claim claim : {Claim::Better, Claim::Poorer}) {
    std::vector<std::vector<Cell>> xs;
    std::vector<std::string> tags;
    for (const auto& r : rows)
      if (r.claim == claim) {
        xs.push_back(r.x);
        tags.push_back(claim == Claim::Better ? "Best" : "Rest");
      }
    out += claim == Claim::Better ? "### Better Examples\n\n" : "\n### Poorer Examples\n\n";
    out += rows_to_markdown(ds, xs, tags);
  }
  return out;
}

/// Extracts better/poorer rows from free-form markdown. The claim of a row
/// comes from its Class cell when present, else from the nearest preceding
/// heading that mentions better/poorer. Rows with uncoercible cells are
/// dropped; numerics are clamped to the column's observed range.
inline std::vector<SyntheticRow> parse_response(const std::string& text, const Dataset& ds) {
  std::istringstream in(text);
  std::string line;
  std::optional<Claim> section;
  std::vector<std::optional<std::size_t>> header_map;  // table column -> independent column
  std::optional<std::size_t> class_col;
  bool in_table = false;
  std::vector<SyntheticRow> out;

  auto claim_from = [](const std::string& s) -> std::optional<Claim> {
    const auto l = detail::lower(s);
    const bool better = l.find("better") != std::string::npos || l == "best";
    const bool poorer = l.find("poorer") != std::string::npos || l.find("worse") != std::string::npos ||
                        l == "rest";
    if (better && !poorer) return Claim::Better;
    if (poorer && !better) return Claim::Poorer;
    return std::nullopt;
  };

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() != '|') {
      in_table = false;
      if (!t.empty())
        if (auto c = claim_from(t)) section = c;
      continue;
    }
    auto cells = detail::split_md_row(t);
    if (!in_table) {
      // header row
      in_table = true;
      header_map.assign(cells.size(), std::nullopt);
      class_col.reset();
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto name = detail::lower(cells[i]);
        if (name == "class" || name == "label" || name == "category") {
          class_col = i;
          continue;
        }
        for (std::size_t j = 0; j < ds.x_columns().size(); ++j)
          if (detail::lower(ds.x_spec(j).name) == name) header_map[i] = j;
      }
      continue;
    }
    if (detail::is_separator_row(cells)) continue;

    std::optional<Claim> claim = section;
    if (class_col && *class_col < cells.size())
      if (auto c = claim_from(cells[*class_col])) claim = c;
    if (!claim) continue;

    SyntheticRow row;
    row.claim = *claim;
    row.x.assign(ds.x_columns().size(), std::monostate{});
    bool ok = true;
    for (std::size_t i = 0; i < cells.size() && i < header_map.size(); ++i) {
      if (!header_map[i]) continue;
      const std::size_t j = *header_map[i];
      const auto& spec = ds.x_spec(j);
      if (spec.kind == Kind::Numeric) {
        auto v = detail::to_number(cells[i]);
        if (!v) {
          ok = false;
          break;
        }
        const auto& s = ds.num_stats(spec.index);
        row.x[j] = s.n ? std::clamp(*v, s.lo, s.hi) : *v;
      } else {
        if (cells[i].empty() || cells[i] == "?") {
          ok = false;
          break;
        }
        row.x[j] = cells[i];
      }
    }
    if (!ok) continue;
    if (std::any_of(row.x.begin(), row.x.end(), is_missing)) continue;
    out.push_back(std::move(row));
  }

  const auto better = std::count_if(out.begin(), out.end(), [](const auto& r) { return r.claim == Claim::Better; });
  const auto poorer = static_cast<std::ptrdiff_t>(out.size()) - better;
  if (better < 1 || poorer < 1)
    throw SynthesisError("response parse: found " + std::to_string(better) + " better and " +
                         std::to_string(poorer) + " poorer usable rows");
  return out;
}

// ---------------------------------------------------------------------------
// mock synthesizer

namespace detail {

/// Moves `from` a fraction of the way toward the class centroid of `group`.
inline std::vector<Cell> nudge(const Dataset& ds, const std::vector<Cell>& from, const std::vector<RowId>& group,
                               double fraction) {
  std::vector<Cell> out = from;
  for (std::size_t j = 0; j < ds.x_columns().size(); ++j) {
    const auto& spec = ds.x_spec(j);
    if (spec.kind == Kind::Numeric) {
      double sum = 0;
      std::size_t n = 0;
      for (RowId id : group)
        if (const auto* v = std::get_if<double>(&ds.row(id).x[j])) sum += *v, ++n;
      const auto& s = ds.num_stats(spec.index);
      if (n == 0) {
        if (is_missing(out[j])) out[j] = s.median;
        continue;
      }
      const double mean = sum / static_cast<double>(n);
      const double start = is_missing(from[j]) ? mean : std::get<double>(from[j]);
      out[j] = std::clamp(start + fraction * (mean - start), s.lo, s.hi);
    } else {
      std::map<std::string, std::size_t> freq;
      for (RowId id : group)
        if (const auto* v = std::get_if<std::string>(&ds.row(id).x[j])) ++freq[*v];
      std::string mode;
      std::size_t top = 0;
      for (const auto& [k, n] : freq)
        if (n > top) top = n, mode = k;
      if (!mode.empty()) out[j] = mode;
      else if (is_missing(out[j])) out[j] = ds.sym_stats(spec.index).mode;
    }
  }
  return out;
}

}  // namespace detail

/// Deterministic stand-in for the LLM: better rows step the top row 10% and
/// 20% of the way toward the best-half centroid; poorer rows do the same from
/// the bottom row toward the rest-half centroid. Symbols take the half's mode.
inline std::vector<SyntheticRow> mock_synthesize(const std::vector<RowId>& e0_sorted, const Dataset& ds) {
  if (e0_sorted.size() < 2) throw std::invalid_argument("mock synthesizer needs at least 2 labeled rows");
  const std::size_t k = best_size(e0_sorted.size());
  const std::vector<RowId> best(e0_sorted.begin(), e0_sorted.begin() + static_cast<std::ptrdiff_t>(k));
  const std::vector<RowId> rest(e0_sorted.begin() + static_cast<std::ptrdiff_t>(k), e0_sorted.end());
  const auto& top = ds.row(e0_sorted.front()).x;
  const auto& bottom = ds.row(e0_sorted.back()).x;
  return {
      {detail::nudge(ds, top, best, 0.1), Claim::Better},
      {detail::nudge(ds, top, best, 0.2), Claim::Better},
      {detail::nudge(ds, bottom, rest, 0.1), Claim::Poorer},
      {detail::nudge(ds, bottom, rest, 0.2), Claim::Poorer},
  };
}

class MockSynthesizer final : public Synthesizer {
 public:
  std::vector<SyntheticRow> synthesize(const SynthesisRequest& request) override {
    return mock_synthesize(request.e0, request.ds);
  }
};

/// Sends the prompt through a text completion function and parses the reply.
class ChatSynthesizer final : public Synthesizer {
 public:
  using Complete = std::function<std::string(const PromptBundle&)>;
  explicit ChatSynthesizer(Complete complete) : complete_(std::move(complete)) {}

  std::vector<SyntheticRow> synthesize(const SynthesisRequest& request) override {
    return parse_response(complete_(request.prompt), request.ds);
  }

 private:
  Complete complete_;
};

// ---------------------------------------------------------------------------
// mapping and the full warm start

/// Nearest row (x_distance) among candidates; ties go to the lowest id.
inline RowId nearest(const std::vector<Cell>& x, const std::vector<RowId>& candidates, const Dataset& ds) {
  RowId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (RowId id : candidates) {
    const double d = x_distance(x, ds.row(id).x, ds);
    if (d < best_d || (d == best_d && id < best)) best_d = d, best = id;
  }
  return best;
}

/// One nearest candidate per synthetic row, duplicates collapsed, first-seen order.
inline std::vector<RowId> map_to_pool(const std::vector<SyntheticRow>& e1, const std::vector<RowId>& candidates,
                                      const Dataset& ds) {
  if (candidates.empty()) throw std::invalid_argument("map_to_pool: empty pool");
  std::vector<RowId> out;
  for (const auto& r : e1) {
    const RowId id = nearest(r.x, candidates, ds);
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  return out;
}

struct WarmStartOptions {
  std::size_t b0 = 4;
  int retries = 2;
  /// Map synthetic rows onto already-labeled E0 rows instead of the pool.
  bool literal_mapping = false;
  /// Total evaluations the run may spend; mapped rows beyond it stay unlabeled.
  std::size_t label_cap = std::numeric_limits<std::size_t>::max();
};

struct WarmStartResult {
  std::vector<RowId> labeled;  // cold-start rows then newly mapped rows
  bool fallback = false;
  std::vector<std::string> log;
};

inline WarmStartResult warm_start(Labels& labels, Synthesizer& synth, Rng& rng, const WarmStartOptions& opt = {}) {
  if (opt.b0 < 2) throw std::invalid_argument("warm start needs b0 >= 2");
  const Dataset& ds = labels.dataset();
  WarmStartResult res;
  res.labeled = cold_start(labels, opt.b0, rng);
  const auto e0 = sort_by_chebyshev(res.labeled, labels);

  SynthesisRequest request{ds, labels, e0, build_prompt(e0, ds)};
  std::optional<std::vector<SyntheticRow>> e1;
  for (int attempt = 0; attempt <= opt.retries && !e1; ++attempt) {
    try {
      e1 = synth.synthesize(request);
    } catch (const std::exception& ex) {
      res.log.push_back("synthesis attempt " + std::to_string(attempt + 1) + " failed: " + ex.what());
    }
  }
  if (!e1) {
    res.fallback = true;
    res.log.push_back("warm start fell back to the cold start");
    return res;
  }

  const auto candidates = opt.literal_mapping ? e0 : labels.unlabeled();
  if (candidates.empty()) return res;
  for (RowId id : map_to_pool(*e1, candidates, ds)) {
    if (labels.evaluations() >= opt.label_cap) {
      res.log.push_back("budget reached while labeling mapped rows");
      break;
    }
    if (labels.label(id)) res.labeled.push_back(id);
  }
  return res;
}

}  // namespace frugal
