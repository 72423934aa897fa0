#pragma once

// Two-class (best vs rest) Naive-Bayes likelihoods and the explore/exploit
// acquisitions built on them.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "frugal/dataset.hpp"
#include "frugal/objective.hpp"

namespace frugal {

inline constexpr double kDivEpsilon = 1e-30;
inline constexpr double kSdFloor = 1e-9;

struct Gaussian {
  double mean = 0;
  double sd = kSdFloor;

  double log_pdf(double v) const {
    const double z = (v - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2 * std::numbers::pi);
  }
  double pdf(double v) const {
    const double z = (v - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2 * std::numbers::pi));
  }
};

/// Add-one smoothed frequencies of one symbolic column within one class.
struct Frequencies {
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t n = 0;         // known values in this class
  std::size_t alphabet = 1;  // distinct values of the column in the whole file

  double prob(const std::string& v) const {
    auto it = counts.find(v);
    const double k = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    return (k + 1.0) / (static_cast<double>(n) + static_cast<double>(alphabet));
  }
};

/// Per-class distribution of one independent column; empty when the class
/// has no known values for it (the column then contributes a factor of 1).
using ColumnModel = std::variant<std::monostate, Gaussian, Frequencies>;

struct ClassModel {
  double prior = 0;
  std::size_t n = 0;
  std::vector<ColumnModel> columns;  // one per independent column
};

struct Likelihoods {
  double best = 0;  // B
  double rest = 0;  // R
  double log_best = 0;
  double log_rest = 0;
};

class TwoClassModel {
 public:
  const ClassModel& best() const { return best_; }
  const ClassModel& rest() const { return rest_; }

  static TwoClassModel fit(const BestRestSplit& split, const Dataset& ds) {
    if (split.best.empty() || split.rest.empty())
      throw std::invalid_argument(split.best.empty() ? "two-class fit: empty best class"
                                                     : "two-class fit: empty rest class");
    const double total = static_cast<double>(split.best.size() + split.rest.size());
    TwoClassModel m;
    m.best_ = fit_class(split.best, ds);
    m.rest_ = fit_class(split.rest, ds);
    m.best_.prior = static_cast<double>(split.best.size()) / total;
    m.rest_.prior = static_cast<double>(split.rest.size()) / total;
    return m;
  }

  /// Log of prior times the product of per-column likelihoods.
  static double log_like(const ClassModel& cls, const std::vector<Cell>& x, const Dataset& ds) {
    double acc = std::log(cls.prior);
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (is_missing(x[j])) continue;
      const auto& cm = cls.columns[j];
      if (const auto* g = std::get_if<Gaussian>(&cm)) {
        acc += g->log_pdf(norm(ds.num_stats(ds.x_columns()[j]), std::get<double>(x[j])));
      } else if (const auto* f = std::get_if<Frequencies>(&cm)) {
        acc += std::log(f->prob(std::get<std::string>(x[j])));
      }
    }
    return acc;
  }

  /// B and R for one row, rescaled so the larger of the two is 1.
  Likelihoods likes(const std::vector<Cell>& x, const Dataset& ds) const {
    Likelihoods l;
    l.log_best = log_like(best_, x, ds);
    l.log_rest = log_like(rest_, x, ds);
    const double top = std::max(l.log_best, l.log_rest);
    l.best = std::exp(l.log_best - top);
    l.rest = std::exp(l.log_rest - top);
    return l;
  }

  /// Unscaled product form; only safe for small well-conditioned inputs.
  static double direct_like(const ClassModel& cls, const std::vector<Cell>& x, const Dataset& ds) {
    double acc = cls.prior;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (is_missing(x[j])) continue;
      const auto& cm = cls.columns[j];
      if (const auto* g = std::get_if<Gaussian>(&cm))
        acc *= g->pdf(norm(ds.num_stats(ds.x_columns()[j]), std::get<double>(x[j])));
      else if (const auto* f = std::get_if<Frequencies>(&cm))
        acc *= f->prob(std::get<std::string>(x[j]));
    }
    return acc;
  }

 private:
  static ClassModel fit_class(const std::vector<RowId>& ids, const Dataset& ds) {
    ClassModel cls;
    cls.n = ids.size();
    for (std::size_t j = 0; j < ds.x_columns().size(); ++j) {
      const std::size_t c = ds.x_columns()[j];
      if (ds.columns()[c].kind == Kind::Numeric) {
        std::vector<double> vs;
        for (RowId id : ids)
          if (const auto* v = std::get_if<double>(&ds.row(id).x[j])) vs.push_back(norm(ds.num_stats(c), *v));
        if (vs.empty()) {
          cls.columns.emplace_back(std::monostate{});
          continue;
        }
        const auto s = Dataset::summarize(std::move(vs));
        cls.columns.emplace_back(Gaussian{s.mean, std::max(s.sd, kSdFloor)});
      } else {
        Frequencies f;
        f.alphabet = std::max<std::size_t>(1, ds.sym_stats(c).freq.size());
        for (RowId id : ids)
          if (const auto* v = std::get_if<std::string>(&ds.row(id).x[j])) {
            ++f.counts[*v];
            ++f.n;
          }
        cls.columns.emplace_back(std::move(f));
      }
    }
    return cls;
  }

  ClassModel best_, rest_;
};

// ---------------------------------------------------------------------------
// acquisitions

/// Zone of certainty: B / (R + eps).
inline double exploit(double b, double r) { return b / (r + kDivEpsilon); }

/// Zone of dispute: |B + R| / (|B - R| + eps).
inline double explore(double b, double r) { return std::abs(b + r) / (std::abs(b - r) + kDivEpsilon); }

/// Explore with the denominator exactly as printed, (B - R) + eps; negative when R > B.
inline double explore_signed(double b, double r) { return std::abs(b + r) / ((b - r) + kDivEpsilon); }

enum class TpeAcquire { Exploit, Explore, ExploreSigned };

/// log of exploit(B, R) from log-likelihoods; monotone in exploit, immune to underflow.
inline double log_exploit(const Likelihoods& l) {
  const double log_eps = std::log(kDivEpsilon);
  const double hi = std::max(l.log_rest, log_eps), lo = std::min(l.log_rest, log_eps);
  return l.log_best - (hi + std::log1p(std::exp(lo - hi)));
}

/// Score used for ranking a pool row. Exploit is ranked in log space so that
/// rows whose B underflows to zero still order correctly.
inline double tpe_score(const Likelihoods& l, TpeAcquire fn) {
  switch (fn) {
    case TpeAcquire::Exploit: return log_exploit(l);
    case TpeAcquire::Explore: return explore(l.best, l.rest);
    case TpeAcquire::ExploreSigned: return explore_signed(l.best, l.rest);
  }
  return 0;
}

/// Argmax of the acquisition over the pool; ties go to the lowest row id.
inline RowId acquire_tpe(const TwoClassModel& m, std::span<const RowId> pool, const Dataset& ds, TpeAcquire fn) {
  if (pool.empty()) throw std::invalid_argument("acquire: empty pool");
  RowId best_id = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (RowId id : pool) {
    const double s = tpe_score(m.likes(ds.row(id).x, ds), fn);
    if (!found || s > best_score || (s == best_score && id < best_id)) {
      best_score = s;
      best_id = id;
      found = true;
    }
  }
  return best_id;
}

}  // namespace frugal
