#pragma once

// Scott-Knott ranking gated by Cliff's delta and a bootstrap test, plus the
// per-stratum rank frequency tally.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frugal/random.hpp"

namespace frugal {

/// (#(x > y) - #(x < y)) / (|a| |b|) over all pairs.
inline double cliffs_delta(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<double> sorted(b.begin(), b.end());
  std::sort(sorted.begin(), sorted.end());
  std::int64_t gt = 0, lt = 0;
  for (double x : a) {
    lt += sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
    gt += std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
  }
  return static_cast<double>(gt - lt) / static_cast<double>(a.size() * b.size());
}

struct BootstrapOptions {
  std::size_t n_boot = 512;
  double conf = 0.95;
  std::uint64_t seed = 1;
};

namespace detail {

struct Moments {
  double mean = 0, var = 0;
  std::size_t n = 0;
};

inline Moments moments(std::span<const double> v) {
  Moments m;
  m.n = v.size();
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(m.n);
  if (m.n > 1) {
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(m.n - 1);
  }
  return m;
}

/// Welch-style |mean difference| / standard error; 0/inf when the error is 0.
inline double t_statistic(const Moments& a, const Moments& b) {
  const double diff = std::abs(a.mean - b.mean);
  const double se = std::sqrt(a.var / static_cast<double>(a.n) + b.var / static_cast<double>(b.n));
  if (se > 0) return diff / se;
  return diff > 0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace detail

/// Fraction of bootstrap draws, under the null of equal means, whose
/// statistic is at least the observed one. Both samples are shifted onto the
/// pooled mean and resampled with replacement.
inline double bootstrap_pvalue(std::span<const double> a, std::span<const double> b, const BootstrapOptions& opt = {}) {
  const auto ma = detail::moments(a), mb = detail::moments(b);
  const double observed = detail::t_statistic(ma, mb);
  if (observed == 0) return 1.0;
  if (std::isinf(observed)) return 0.0;
  const double pooled = (ma.mean * static_cast<double>(ma.n) + mb.mean * static_cast<double>(mb.n)) /
                        static_cast<double>(ma.n + mb.n);
  std::vector<double> a0, b0;
  for (double x : a) a0.push_back(x - ma.mean + pooled);
  for (double x : b) b0.push_back(x - mb.mean + pooled);

  Rng rng(opt.seed);
  std::vector<double> ra(a0.size()), rb(b0.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < opt.n_boot; ++i) {
    for (auto& v : ra) v = a0[rng.index(a0.size())];
    for (auto& v : rb) v = b0[rng.index(b0.size())];
    if (detail::t_statistic(detail::moments(ra), detail::moments(rb)) >= observed) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(opt.n_boot);
}

/// True when the difference is not significant at the configured confidence.
inline bool bootstrap_same(std::span<const double> a, std::span<const double> b, const BootstrapOptions& opt = {}) {
  return bootstrap_pvalue(a, b, opt) >= 1.0 - opt.conf;
}

/// E(delta) for cutting a value-list sequence before position `cut`.
inline double split_gain(std::span<const std::vector<double>> samples, std::size_t cut) {
  double s1 = 0, s2 = 0;
  std::size_t n1 = 0, n2 = 0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (double v : samples[i]) (i < cut ? (s1 += v, ++n1) : (s2 += v, ++n2));
  if (n1 == 0 || n2 == 0) return 0.0;
  const double n = static_cast<double>(n1 + n2);
  const double m = (s1 + s2) / n, m1 = s1 / static_cast<double>(n1), m2 = s2 / static_cast<double>(n2);
  return static_cast<double>(n1) / n * (m1 - m) * (m1 - m) + static_cast<double>(n2) / n * (m2 - m) * (m2 - m);
}

/// Cut index in [1, n) maximizing E(delta); empty when every value is equal.
inline std::optional<std::size_t> sk_split(std::span<const std::vector<double>> samples) {
  if (samples.size() < 2) return std::nullopt;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : samples)
    for (double v : s) lo = std::min(lo, v), hi = std::max(hi, v);
  if (!(hi > lo)) return std::nullopt;
  std::size_t best = 1;
  double best_gain = -1;
  for (std::size_t cut = 1; cut < samples.size(); ++cut) {
    const double g = split_gain(samples, cut);
    if (g > best_gain) best_gain = g, best = cut;
  }
  return best;
}

struct ScottKnottOptions {
  double delta_small = 0.147;
  BootstrapOptions bootstrap;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline double sd_of(std::span<const double> v) { return v.size() < 2 ? 0.0 : std::sqrt(detail::moments(v).var); }

/// Linear-interpolated percentile, p in [0,1].
inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double at = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(at);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (at - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

template <class Key>
struct Sample {
  Key key;
  std::vector<double> values;
};

template <class Key>
struct RankedSample {
  std::size_t rank = 0;
  Key key;
  std::vector<double> values;
  double median = 0;
  double sd = 0;
};

template <class Key>
struct RankTable {
  std::vector<RankedSample<Key>> rows;  // median-sorted, ranks non-decreasing
  std::size_t gate_depth = 0;          // most statistical gates on any root-to-leaf path

  std::size_t num_ranks() const { return rows.empty() ? 0 : rows.back().rank + 1; }
};

/// Median-sorts the samples, then recursively bisects at the E(delta)
/// maximizing cut while both halves differ in effect size and significance.
template <class Key>
RankTable<Key> scott_knott(std::vector<Sample<Key>> samples, const ScottKnottOptions& opt = {}) {
  struct Item {
    Sample<Key> s;
    double median, mean;
    std::size_t order;
  };
  std::vector<Item> items;
  items.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double med = median_of(samples[i].values);
    const double mean = samples[i].values.empty() ? 0.0 : detail::moments(samples[i].values).mean;
    items.push_back({std::move(samples[i]), med, mean, i});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.median != b.median) return a.median < b.median;
    return a.mean < b.mean;
  });

  std::vector<std::vector<double>> values;
  for (const auto& it : items) values.push_back(it.s.values);

  RankTable<Key> table;
  std::vector<std::size_t> ranks(items.size(), 0);
  std::size_t next_rank = 0;

  auto pooled = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> out;
    for (std::size_t i = lo; i < hi; ++i) out.insert(out.end(), values[i].begin(), values[i].end());
    return out;
  };

  std::function<void(std::size_t, std::size_t, std::size_t)> recurse = [&](std::size_t lo, std::size_t hi,
                                                                            std::size_t depth) {
    if (hi - lo >= 2) {
      const auto cut = sk_split(std::span<const std::vector<double>>(values).subspan(lo, hi - lo));
      if (cut) {
        table.gate_depth = std::max(table.gate_depth, depth + 1);
        const std::size_t mid = lo + *cut;
        const auto left = pooled(lo, mid), right = pooled(mid, hi);
        if (std::abs(cliffs_delta(left, right)) > opt.delta_small && !bootstrap_same(left, right, opt.bootstrap)) {
          recurse(lo, mid, depth + 1);
          recurse(mid, hi, depth + 1);
          return;
        }
      }
    }
    for (std::size_t i = lo; i < hi; ++i) ranks[i] = next_rank;
    ++next_rank;
  };
  if (!items.empty()) recurse(0, items.size(), 0);

  for (std::size_t i = 0; i < items.size(); ++i) {
    RankedSample<Key> r;
    r.rank = ranks[i];
    r.median = items[i].median;
    r.sd = sd_of(items[i].s.values);
    r.key = std::move(items[i].s.key);
    r.values = std::move(items[i].s.values);
    table.rows.push_back(std::move(r));
  }
  return table;
}

/// Percentages of tables in which each group's best (lowest) rank is r.
struct FrequencyTable {
  std::size_t tables = 0;
  std::size_t max_rank = 0;  // columns 0..max_rank
  struct Line {
    std::string group;
    std::vector<double> percent;  // by rank
  };
  std::vector<Line> lines;  // sorted by rank-0 percentage, descending
};

template <class Key, class GroupFn>
FrequencyTable rank_frequencies(const std::vector<RankTable<Key>>& tables, GroupFn group_of) {
  FrequencyTable out;
  out.tables = tables.size();
  std::map<std::string, std::map<std::size_t, std::size_t>> counts;
  for (const auto& t : tables) {
    std::map<std::string, std::size_t> best;
    for (const auto& r : t.rows) {
      const std::string g = group_of(r.key);
      auto it = best.find(g);
      if (it == best.end() || r.rank < it->second) best[g] = r.rank;
    }
    for (const auto& [g, rank] : best) {
      ++counts[g][rank];
      out.max_rank = std::max(out.max_rank, rank);
    }
  }
  for (const auto& [g, by_rank] : counts) {
    FrequencyTable::Line line{g, std::vector<double>(out.max_rank + 1, 0.0)};
    for (const auto& [rank, n] : by_rank)
      line.percent[rank] = 100.0 * static_cast<double>(n) / static_cast<double>(out.tables);
    out.lines.push_back(std::move(line));
  }
  std::stable_sort(out.lines.begin(), out.lines.end(),
                   [](const auto& a, const auto& b) { return a.percent[0] > b.percent[0]; });
  return out;
}

}  // namespace frugal
