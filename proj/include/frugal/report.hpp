#pragma once

// Reports over a results directory: per-dataset rank tables, per-stratum rank
// frequencies, evaluations-needed summary and normalized-improvement curves.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "frugal/engine.hpp"
#include "frugal/experiment.hpp"
#include "frugal/stats.hpp"

namespace frugal {

struct TreatmentKey {
  Start start = Start::None;
  Acquire acquire = Acquire::Random;
  std::size_t budget = 0;

  std::string arm() const { return Treatment{start, acquire, budget}.arm(); }
  auto operator<=>(const TreatmentKey&) const = default;
};

struct DatasetInfo {
  std::string name;
  std::size_t rows = 0;
  Dims dims = Dims::Low;
  FileSummary summary;
  std::vector<double> chebyshev;  // every row's score
};

struct ResultsDir {
  std::vector<RunResult> results;
  std::map<std::string, DatasetInfo> datasets;
};

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ResultsDir read_results_dir(const std::filesystem::path& dir) {
  ResultsDir out;
  std::ifstream res(dir / "results.jsonl", std::ios::binary);
  if (!res) throw ReportError("no results.jsonl in " + dir.string());
  for (std::string line; std::getline(res, line);)
    if (!line.empty()) out.results.push_back(parse_result_line(line));
  if (out.results.empty()) throw ReportError("results directory " + dir.string() + " has no result lines");

  std::ifstream dsin(dir / "datasets.jsonl", std::ios::binary);
  for (std::string line; std::getline(dsin, line);) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    DatasetInfo d;
    d.name = j.at("dataset").get<std::string>();
    d.rows = j.at("rows").get<std::size_t>();
    d.dims = parse_dims(j.at("dims").get<std::string>()).value_or(Dims::Low);
    d.summary = {j.at("mean").get<double>(), j.at("lo").get<double>()};
    d.chebyshev = j.at("chebyshev").get<std::vector<double>>();
    out.datasets[d.name] = std::move(d);
  }
  return out;
}

using TreatmentTable = RankTable<TreatmentKey>;

/// Scott-Knott over every treatment of one dataset. The baseline sample is
/// the Chebyshev score of every row in the file.
inline TreatmentTable rank_dataset(const std::string& dataset, const ResultsDir& rd, const ScottKnottOptions& opt) {
  std::map<TreatmentKey, std::vector<double>> values;
  for (const auto& r : rd.results) {
    if (r.dataset != dataset) continue;
    TreatmentKey k{r.treatment.start, r.treatment.acquire, r.treatment.budget};
    if (r.treatment.acquire == Acquire::Baseline) {
      auto it = rd.datasets.find(dataset);
      if (it != rd.datasets.end() && !it->second.chebyshev.empty()) {
        values[k] = it->second.chebyshev;
        continue;
      }
    }
    values[k].push_back(r.best_chebyshev);
  }
  std::vector<Sample<TreatmentKey>> samples;
  for (auto& [k, v] : values) samples.push_back({k, std::move(v)});
  return scott_knott(std::move(samples), opt);
}

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

/// 10th..30th and 70th..90th percentiles as dashes, median as 'o'.
inline std::string sparkline(const std::vector<double>& v, double lo, double hi, std::size_t width = 30) {
  std::string line(width, ' ');
  auto pos = [&](double x) {
    if (!(hi > lo)) return std::size_t{0};
    const double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    return std::min(width - 1, static_cast<std::size_t>(t * static_cast<double>(width - 1) + 0.5));
  };
  const double p10 = percentile(v, 0.1), p30 = percentile(v, 0.3), p50 = percentile(v, 0.5);
  const double p70 = percentile(v, 0.7), p90 = percentile(v, 0.9);
  for (std::size_t i = pos(p10); i <= pos(p30); ++i) line[i] = '-';
  for (std::size_t i = pos(p70); i <= pos(p90); ++i) line[i] = '-';
  line[pos(p50)] = 'o';
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

}  // namespace detail

inline std::string render_rank_text(const TreatmentTable& t) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : t.rows)
    for (double v : r.values) lo = std::min(lo, v), hi = std::max(hi, v);
  std::ostringstream os;
  os << "Rank  Start   Acquire         Budget  Median  Std   Visualization (o = median)\n";
  for (const auto& r : t.rows) {
    os << detail::pad(std::to_string(r.rank), 6) << detail::pad(to_string(r.key.start), 8)
       << detail::pad(to_string(r.key.acquire), 16) << detail::pad(std::to_string(r.key.budget), 8)
       << detail::pad(detail::fixed(r.median), 8) << detail::pad(detail::fixed(r.sd), 6)
       << detail::sparkline(r.values, lo, hi) << '\n';
  }
  return os.str();
}

inline std::string render_rank_csv(const TreatmentTable& t) {
  std::ostringstream os;
  os << "rank,start,acquire,budget,median,sd,n\n";
  for (const auto& r : t.rows)
    os << r.rank << ',' << to_string(r.key.start) << ',' << to_string(r.key.acquire) << ',' << r.key.budget << ','
       << detail::fixed(r.median, 6) << ',' << detail::fixed(r.sd, 6) << ',' << r.values.size() << '\n';
  return os.str();
}

/// Percent of datasets in which each start/acquire pair's best rank is r.
inline FrequencyTable stratum_frequencies(const std::vector<TreatmentTable>& tables) {
  return rank_frequencies(tables, [](const TreatmentKey& k) { return k.arm(); });
}

inline std::string render_frequency_csv(const FrequencyTable& f) {
  std::ostringstream os;
  os << "start,acquire";
  for (std::size_t r = 0; r <= f.max_rank; ++r) os << ",rank" << r;
  os << '\n';
  for (const auto& line : f.lines) {
    const auto slash = line.group.find('/');
    const std::string start = slash == std::string::npos ? "" : line.group.substr(0, slash);
    const std::string acquire = slash == std::string::npos ? line.group : line.group.substr(slash + 1);
    os << start << ',' << acquire;
    for (double p : line.percent) os << ',' << detail::fixed(p, 0);
    os << '\n';
  }
  return os.str();
}

/// Mean budget at which each arm attained each rank, over all datasets.
struct EvaluationsNeeded {
  std::size_t max_rank = 0;
  std::map<std::string, std::map<std::size_t, std::pair<double, std::size_t>>> sums;  // arm -> rank -> (sum, n)
};

inline EvaluationsNeeded evaluations_needed(const std::vector<TreatmentTable>& tables) {
  EvaluationsNeeded e;
  for (const auto& t : tables)
    for (const auto& r : t.rows) {
      if (r.key.acquire == Acquire::Baseline) continue;
      auto& cell = e.sums[r.key.arm()][r.rank];
      cell.first += static_cast<double>(r.key.budget);
      ++cell.second;
      e.max_rank = std::max(e.max_rank, r.rank);
    }
  return e;
}

inline std::string render_evaluations_csv(const EvaluationsNeeded& e) {
  std::ostringstream os;
  os << "treatment";
  for (std::size_t r = 0; r <= e.max_rank; ++r) os << ",rank" << r;
  os << '\n';
  for (const auto& [arm, by_rank] : e.sums) {
    os << arm;
    for (std::size_t r = 0; r <= e.max_rank; ++r) {
      auto it = by_rank.find(r);
      os << ',';
      if (it != by_rank.end()) os << detail::fixed(it->second.first / static_cast<double>(it->second.second), 1);
    }
    os << '\n';
  }
  return os.str();
}

struct ImprovementPoint {
  std::string dataset;
  std::string arm;
  std::size_t budget = 0;
  double value = 0;
};

inline std::vector<ImprovementPoint> improvement_points(const ResultsDir& rd) {
  std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<double>> groups;
  for (const auto& r : rd.results) {
    if (!is_active(r.treatment.acquire) && r.treatment.acquire != Acquire::Random) continue;
    groups[{r.dataset, r.treatment.arm(), r.treatment.budget}].push_back(r.best_chebyshev);
  }
  std::vector<ImprovementPoint> out;
  for (const auto& [key, vals] : groups) {
    auto it = rd.datasets.find(std::get<0>(key));
    if (it == rd.datasets.end()) continue;
    if (auto v = normalized_improvement(vals, it->second.summary))
      out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), *v});
  }
  return out;
}

/// arm -> budget -> mean normalized improvement across datasets.
inline std::map<std::string, std::map<std::size_t, double>> improvement_curve(const std::vector<ImprovementPoint>& pts) {
  std::map<std::string, std::map<std::size_t, std::pair<double, std::size_t>>> acc;
  for (const auto& p : pts) {
    auto& c = acc[p.arm][p.budget];
    c.first += p.value;
    ++c.second;
  }
  std::map<std::string, std::map<std::size_t, double>> out;
  for (const auto& [arm, by_b] : acc)
    for (const auto& [b, c] : by_b) out[arm][b] = c.first / static_cast<double>(c.second);
  return out;
}

struct RankSummary {
  std::size_t tables = 0;
  std::filesystem::path dir;
};

/// Writes every report under <results>/report. Pure function of the inputs.
inline RankSummary write_reports(const std::filesystem::path& results_dir, const ScottKnottOptions& opt) {
  namespace fs = std::filesystem;
  const auto rd = read_results_dir(results_dir);
  const fs::path out = results_dir / "report";
  fs::create_directories(out);

  std::set<std::string> names;
  for (const auto& r : rd.results) names.insert(r.dataset);

  std::map<Dims, std::vector<TreatmentTable>> by_dims;
  std::vector<TreatmentTable> all;
  for (const auto& name : names) {
    auto t = rank_dataset(name, rd, opt);
    std::ofstream(out / (name + ".rank.txt"), std::ios::binary) << render_rank_text(t);
    std::ofstream(out / (name + ".rank.csv"), std::ios::binary) << render_rank_csv(t);
    auto it = rd.datasets.find(name);
    by_dims[it == rd.datasets.end() ? Dims::Low : it->second.dims].push_back(t);
    all.push_back(std::move(t));
  }

  for (Dims d : {Dims::Low, Dims::Medium, Dims::High})
    std::ofstream(out / (std::string("frequencies_") + to_string(d) + ".csv"), std::ios::binary)
        << render_frequency_csv(stratum_frequencies(by_dims[d]));
  std::ofstream(out / "frequencies_all.csv", std::ios::binary) << render_frequency_csv(stratum_frequencies(all));
  std::ofstream(out / "evaluations_needed.csv", std::ios::binary) << render_evaluations_csv(evaluations_needed(all));

  const auto pts = improvement_points(rd);
  {
    std::ofstream f(out / "improvement.csv", std::ios::binary);
    f << "dataset,treatment,budget,normalized_improvement\n";
    for (const auto& p : pts) f << p.dataset << ',' << p.arm << ',' << p.budget << ',' << detail::fixed(p.value, 6) << '\n';
  }
  {
    std::ofstream f(out / "improvement_curve.csv", std::ios::binary);
    f << "treatment,budget,mean_normalized_improvement\n";
    for (const auto& [arm, by_b] : improvement_curve(pts))
      for (const auto& [b, v] : by_b) f << arm << ',' << b << ',' << detail::fixed(v, 6) << '\n';
  }
  return {all.size(), out};
}

}  // namespace frugal
