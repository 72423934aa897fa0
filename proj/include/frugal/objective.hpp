#pragma once

// Chebyshev scoring against the ideal point and the best/rest partition.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "frugal/dataset.hpp"

namespace frugal {

/// Normalized target per goal: 0 for minimize goals, 1 for maximize goals.
inline std::vector<double> ideal_point(const Dataset& ds) {
  std::vector<double> ideal;
  ideal.reserve(ds.y_columns().size());
  for (std::size_t j = 0; j < ds.y_columns().size(); ++j)
    ideal.push_back(ds.y_spec(j).direction == Direction::Maximize ? 1.0 : 0.0);
  return ideal;
}

/// Chebyshev distance of a goal vector to the ideal point. Uses full-file
/// lo/hi, so this is the simulator's view; learners go through Labels.
inline double chebyshev_of(const Dataset& ds, const std::vector<double>& y) {
  double worst = 0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const auto& spec = ds.y_spec(j);
    const double ideal = spec.direction == Direction::Maximize ? 1.0 : 0.0;
    worst = std::max(worst, std::abs(norm(ds.num_stats(spec.index), y[j]) - ideal));
  }
  return worst;
}

/// Score of a labeled row; throws std::logic_error for unlabeled rows.
inline double chebyshev(RowId id, const Labels& labels) {
  return chebyshev_of(labels.dataset(), labels.goals(id));
}

/// Every row's score, as if the whole file were labeled (baseline view).
inline std::vector<double> all_chebyshev(const Dataset& ds) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& r : ds.rows()) out.push_back(chebyshev_of(ds, r.y));
  return out;
}

struct BestRestSplit {
  std::vector<RowId> best;  // ascending Chebyshev
  std::vector<RowId> rest;  // ascending Chebyshev
};

inline std::size_t best_size(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n)))));
}

/// Labeled rows sorted by (chebyshev, id); the first round(sqrt(N)) are best.
inline std::vector<RowId> sort_by_chebyshev(std::vector<RowId> ids, const Labels& labels) {
  std::vector<std::pair<double, RowId>> keyed;
  keyed.reserve(ids.size());
  for (RowId id : ids) keyed.emplace_back(chebyshev(id, labels), id);
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < keyed.size(); ++i) ids[i] = keyed[i].second;
  return ids;
}

inline BestRestSplit split(const std::vector<RowId>& labeled, const Labels& labels) {
  if (labeled.size() < 2) throw std::invalid_argument("split needs at least 2 labeled rows");
  auto sorted = sort_by_chebyshev(labeled, labels);
  const std::size_t k = best_size(sorted.size());
  BestRestSplit out;
  out.best.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k));
  out.rest.assign(sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  return out;
}

}  // namespace frugal
