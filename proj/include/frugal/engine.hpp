#pragma once

// Active-learning loops (two-class and GP surrogates), random selection and
// the whole-file baseline, with strict label accounting.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frugal/dataset.hpp"
#include "frugal/gp.hpp"
#include "frugal/likelihood.hpp"
#include "frugal/objective.hpp"
#include "frugal/random.hpp"
#include "frugal/warmstart.hpp"

namespace frugal {

enum class Start { Random, Llm, None };
enum class Acquire { Exploit, Explore, ExploreSigned, Ucb, Pi, Ei, Random, Baseline };

inline const char* to_string(Start s) {
  switch (s) {
    case Start::Random: return "random";
    case Start::Llm: return "LLM";
    case Start::None: return "";
  }
  return "";
}

inline const char* to_string(Acquire a) {
  switch (a) {
    case Acquire::Exploit: return "exploit";
    case Acquire::Explore: return "explore";
    case Acquire::ExploreSigned: return "explore-signed";
    case Acquire::Ucb: return "UCB_GPM";
    case Acquire::Pi: return "PI_GPM";
    case Acquire::Ei: return "EI_GPM";
    case Acquire::Random: return "random";
    case Acquire::Baseline: return "baseline";
  }
  return "";
}

inline std::optional<Start> parse_start(std::string s) {
  s = detail::lower(std::move(s));
  if (s == "random") return Start::Random;
  if (s == "llm") return Start::Llm;
  if (s.empty()) return Start::None;
  return std::nullopt;
}

inline std::optional<Acquire> parse_acquire(std::string s) {
  s = detail::lower(std::move(s));
  if (s == "exploit") return Acquire::Exploit;
  if (s == "explore") return Acquire::Explore;
  if (s == "explore-signed") return Acquire::ExploreSigned;
  if (s == "ucb" || s == "ucb_gpm") return Acquire::Ucb;
  if (s == "pi" || s == "pi_gpm") return Acquire::Pi;
  if (s == "ei" || s == "ei_gpm") return Acquire::Ei;
  if (s == "random") return Acquire::Random;
  if (s == "baseline") return Acquire::Baseline;
  return std::nullopt;
}

inline bool is_active(Acquire a) { return a != Acquire::Random && a != Acquire::Baseline; }
inline bool is_gp(Acquire a) { return a == Acquire::Ucb || a == Acquire::Pi || a == Acquire::Ei; }

/// One experimental arm. Random selection and baseline carry Start::None.
struct Treatment {
  Start start = Start::Random;
  Acquire acquire = Acquire::Exploit;
  std::size_t budget = 20;

  /// "start/acquire" with the start omitted for random selection and baseline.
  std::string arm() const {
    return start == Start::None ? std::string(to_string(acquire))
                                : std::string(to_string(start)) + "/" + to_string(acquire);
  }
  bool operator==(const Treatment&) const = default;
};

struct TracePoint {
  std::size_t evaluation = 0;  // 1-based
  double best_so_far = 0;
};

struct RunResult {
  std::string dataset;
  Treatment treatment;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  double best_chebyshev = 0;  // baseline: median over all rows
  double baseline_sd = 0;     // baseline only
  std::size_t evaluations_used = 0;
  std::size_t labeled_rows = 0;  // independent count of labeled flags
  std::vector<TracePoint> trace;
  bool warm_fallback = false;
  std::vector<std::string> log;
};

struct EngineOptions {
  std::size_t b0 = 4;
  GpAcquireParams gp_params;
  GpOptions gp;
  WarmStartOptions warm;  // b0 is overwritten from above
};

namespace detail {

inline std::vector<TracePoint> trace_of(const Labels& labels) {
  std::vector<TracePoint> trace;
  double best = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  for (RowId id : labels.labeled()) {
    best = std::min(best, chebyshev(id, labels));
    trace.push_back({++i, best});
  }
  return trace;
}

inline RunResult finish(const Labels& labels, const Treatment& t, std::uint64_t seed) {
  RunResult r;
  r.dataset = labels.dataset().name();
  r.treatment = t;
  r.seed = seed;
  r.trace = trace_of(labels);
  r.best_chebyshev = r.trace.empty() ? std::numeric_limits<double>::quiet_NaN() : r.trace.back().best_so_far;
  r.evaluations_used = labels.evaluations();
  r.labeled_rows = labels.count_labeled();
  return r;
}

}  // namespace detail

/// Cold- or warm-started active learning until the budget is spent.
inline RunResult run_active(const Dataset& ds, const Treatment& t, Synthesizer* synth, std::uint64_t seed,
                            const EngineOptions& opt = {}) {
  if (!is_active(t.acquire)) throw std::invalid_argument("run_active: acquire must be a surrogate-based function");
  if (t.budget > ds.size())
    throw std::invalid_argument("budget " + std::to_string(t.budget) + " exceeds the " + std::to_string(ds.size()) +
                                " rows of " + ds.name());
  if (t.budget <= opt.b0) throw std::invalid_argument("budget must exceed the start size b0");

  Labels labels(ds);
  Rng rng(seed);
  std::vector<std::string> log;
  bool fallback = false;

  if (t.start == Start::Llm) {
    if (synth == nullptr) throw std::invalid_argument("LLM start needs a synthesizer");
    WarmStartOptions w = opt.warm;
    w.b0 = opt.b0;
    w.label_cap = t.budget;
    auto ws = warm_start(labels, *synth, rng, w);
    fallback = ws.fallback;
    log = std::move(ws.log);
  } else {
    cold_start(labels, opt.b0, rng);
  }

  std::optional<Encoding> enc;
  if (is_gp(t.acquire)) enc.emplace(ds);

  while (labels.evaluations() < t.budget) {
    const auto pool = labels.unlabeled();
    if (pool.empty()) {
      log.push_back("pool exhausted after " + std::to_string(labels.evaluations()) + " evaluations");
      break;
    }
    const auto& labeled = labels.labeled();
    RowId next;
    if (is_gp(t.acquire)) {
      const auto model = fit_gp(labeled, labels, *enc, opt.gp);
      const auto fn = t.acquire == Acquire::Ucb ? GpAcquire::Ucb : t.acquire == Acquire::Pi ? GpAcquire::Pi
                                                                                            : GpAcquire::Ei;
      next = acquire_gp(model, incumbent(labeled, labels), pool, ds, *enc, fn, opt.gp_params, rng);
    } else {
      const auto model = TwoClassModel::fit(split(labeled, labels), ds);
      const auto fn = t.acquire == Acquire::Exploit  ? TpeAcquire::Exploit
                      : t.acquire == Acquire::Explore ? TpeAcquire::Explore
                                                      : TpeAcquire::ExploreSigned;
      next = acquire_tpe(model, pool, ds, fn);
    }
    labels.label(next);
  }

  auto r = detail::finish(labels, t, seed);
  r.warm_fallback = fallback;
  r.log = std::move(log);
  return r;
}

/// Label b1 uniformly chosen rows and keep the best.
inline RunResult run_random(const Dataset& ds, std::size_t b1, std::uint64_t seed) {
  if (b1 > ds.size())
    throw std::invalid_argument("budget " + std::to_string(b1) + " exceeds the " + std::to_string(ds.size()) +
                                " rows of " + ds.name());
  Labels labels(ds);
  Rng rng(seed);
  cold_start(labels, b1, rng);
  return detail::finish(labels, {Start::None, Acquire::Random, b1}, seed);
}

/// The whole file as labeled: median and sd of every row's score.
inline RunResult run_baseline(const Dataset& ds) {
  RunResult r;
  r.dataset = ds.name();
  r.treatment = {Start::None, Acquire::Baseline, ds.size()};
  const auto s = Dataset::summarize(all_chebyshev(ds));
  r.best_chebyshev = s.median;
  r.baseline_sd = s.sd;
  r.evaluations_used = ds.size();
  r.labeled_rows = ds.size();
  return r;
}

/// Dispatches on the treatment's acquire kind.
inline RunResult run_treatment(const Dataset& ds, const Treatment& t, Synthesizer* synth, std::uint64_t seed,
                               const EngineOptions& opt = {}) {
  switch (t.acquire) {
    case Acquire::Random: return run_random(ds, t.budget, seed);
    case Acquire::Baseline: return run_baseline(ds);
    default: return run_active(ds, t, synth, seed, opt);
  }
}

/// Mean and minimum Chebyshev over the whole file.
struct FileSummary {
  double mean = 0;
  double lo = 0;
};

inline FileSummary file_summary(const Dataset& ds) {
  const auto s = Dataset::summarize(all_chebyshev(ds));
  return {s.mean, s.lo};
}

/// (mean(best) - lo) / (mu - lo); empty when the file is degenerate.
inline std::optional<double> normalized_improvement(const std::vector<double>& best_found, const FileSummary& f) {
  if (!(f.mean > f.lo) || best_found.empty()) return std::nullopt;
  double sum = 0;
  for (double v : best_found) sum += v;
  return (sum / static_cast<double>(best_found.size()) - f.lo) / (f.mean - f.lo);
}

inline std::optional<double> normalized_improvement(const std::vector<double>& best_found, const Dataset& ds) {
  return normalized_improvement(best_found, file_summary(ds));
}

}  // namespace frugal
