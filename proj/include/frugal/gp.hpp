#pragma once

// Gaussian-process surrogate over encoded rows, with UCB, PI and EI.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "frugal/dataset.hpp"
#include "frugal/objective.hpp"
#include "frugal/random.hpp"

namespace frugal {

class ModelFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row -> fixed-length vector: normalized numerics, one-hot symbols.
/// Missing numerics encode as 0.5, missing symbols as an all-zero block.
class Encoding {
 public:
  explicit Encoding(const Dataset& ds) : ds_(&ds) {
    for (std::size_t j = 0; j < ds.x_columns().size(); ++j) {
      const std::size_t c = ds.x_columns()[j];
      offsets_.push_back(width_);
      if (ds.columns()[c].kind == Kind::Numeric) {
        alphabets_.emplace_back();
        width_ += 1;
      } else {
        std::vector<std::string> symbols;
        for (const auto& [k, n] : ds.sym_stats(c).freq) symbols.push_back(k);
        width_ += symbols.size();
        alphabets_.push_back(std::move(symbols));
      }
    }
  }

  std::size_t width() const { return width_; }

  Eigen::VectorXd encode(const std::vector<Cell>& x) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width_));
    for (std::size_t j = 0; j < x.size(); ++j) {
      const std::size_t c = ds_->x_columns()[j];
      const auto at = static_cast<Eigen::Index>(offsets_[j]);
      if (ds_->columns()[c].kind == Kind::Numeric) {
        v[at] = is_missing(x[j]) ? 0.5 : norm(ds_->num_stats(c), std::get<double>(x[j]));
      } else if (const auto* s = std::get_if<std::string>(&x[j])) {
        const auto& a = alphabets_[j];
        auto it = std::lower_bound(a.begin(), a.end(), *s);
        if (it != a.end() && *it == *s) v[at + (it - a.begin())] = 1.0;
      }
    }
    return v;
  }

 private:
  const Dataset* ds_;
  std::size_t width_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<std::string>> alphabets_;  // sorted; empty for numerics
};

struct Prediction {
  double mu = 0;
  double sigma = 0;
};

struct GpOptions {
  std::vector<double> length_scales{0.1, 0.3, 1.0, 3.0};
  double jitter = 1e-6;
  double max_jitter = 1e-2;
};

/// Zero-noise RBF regression with a constant mean at the target average.
class GpModel {
 public:
  static GpModel fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets, const GpOptions& opt = {}) {
    const Eigen::Index n = inputs.rows();
    if (n < 2) throw ModelFitError("gp fit needs at least 2 training points");
    if (targets.size() != n) throw std::invalid_argument("gp fit: inputs/targets size mismatch");

    GpModel m;
    m.x_ = std::move(inputs);
    m.mean_ = targets.mean();
    m.centered_ = targets.array() - m.mean_;
    m.signal_ = std::max(m.centered_.squaredNorm() / static_cast<double>(n), 1e-6);

    double best_lml = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (double ell : opt.length_scales) {
      for (double jitter = opt.jitter; jitter <= opt.max_jitter * (1 + 1e-9); jitter *= 10) {
        Eigen::LLT<Eigen::MatrixXd> llt(m.kernel_matrix(ell, jitter));
        if (llt.info() != Eigen::Success) continue;
        const Eigen::VectorXd alpha = llt.solve(m.centered_);
        const Eigen::MatrixXd l = llt.matrixL();
        const double lml = -0.5 * m.centered_.dot(alpha) - l.diagonal().array().log().sum() -
                           0.5 * static_cast<double>(n) * std::log(2 * std::numbers::pi);
        if (std::isfinite(lml) && (!any || lml > best_lml)) {
          best_lml = lml;
          m.length_ = ell;
          m.noise_ = jitter;
          m.llt_ = llt;
          m.alpha_ = alpha;
          any = true;
        }
        break;
      }
    }
    if (!any) throw ModelFitError("gp fit: kernel matrix not positive definite at jitter up to 1e-2");
    m.log_marginal_likelihood_ = best_lml;
    return m;
  }

  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return signal_ * std::exp(-(a - b).squaredNorm() / (2 * length_ * length_));
  }

  Prediction predict(const Eigen::VectorXd& x) const {
    const Eigen::Index n = x_.rows();
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) k[i] = kernel(x_.row(i).transpose(), x);
    const double mu = mean_ + k.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    const double var = std::max(signal_ - v.squaredNorm(), 0.0);
    return {mu, std::sqrt(var)};
  }

  double length_scale() const { return length_; }
  double signal_variance() const { return signal_; }
  double noise() const { return noise_; }
  double prior_mean() const { return mean_; }
  double log_marginal_likelihood() const { return log_marginal_likelihood_; }

 private:
  Eigen::MatrixXd kernel_matrix(double ell, double jitter) const {
    const Eigen::Index n = x_.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = signal_ * std::exp(-(x_.row(i) - x_.row(j)).squaredNorm() / (2 * ell * ell));
        k(i, j) = k(j, i) = v;
      }
    k.diagonal().array() += jitter;
    return k;
  }

  Eigen::MatrixXd x_;
  Eigen::VectorXd centered_, alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double mean_ = 0, signal_ = 1, length_ = 1, noise_ = 1e-6;
  double log_marginal_likelihood_ = 0;
};

/// Fits on labeled rows with target g = 1 - chebyshev (larger is better).
inline GpModel fit_gp(const std::vector<RowId>& labeled, const Labels& labels, const Encoding& enc,
                      const GpOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(labeled.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(enc.width()));
  Eigen::VectorXd g(n);
  const auto& ds = labels.dataset();
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = enc.encode(ds.row(labeled[static_cast<std::size_t>(i)]).x).transpose();
    g[i] = 1.0 - chebyshev(labeled[static_cast<std::size_t>(i)], labels);
  }
  return GpModel::fit(std::move(x), std::move(g), opt);
}

/// Best modeled objective (max g) among labeled rows.
inline double incumbent(const std::vector<RowId>& labeled, const Labels& labels) {
  double f = -std::numeric_limits<double>::infinity();
  for (RowId id : labeled) f = std::max(f, 1.0 - chebyshev(id, labels));
  return f;
}

// ---------------------------------------------------------------------------
// acquisitions

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double ucb(double mu, double sigma, double kappa) { return mu + kappa * sigma; }

inline double probability_of_improvement(double mu, double sigma, double f_star, double epsilon) {
  const double d = mu - f_star - epsilon;
  if (sigma <= 0) return mu > f_star + epsilon ? 1.0 : 0.0;
  return normal_cdf(d / sigma);
}

inline double expected_improvement(double mu, double sigma, double f_star, double epsilon) {
  if (sigma <= 0) return 0.0;
  const double d = mu - f_star - epsilon;
  const double z = d / sigma;
  return std::max(0.0, d * normal_cdf(z) + sigma * normal_pdf(z));
}

enum class GpAcquire { Ucb, Pi, Ei };

struct GpAcquireParams {
  double kappa = 2.0;
  double epsilon = 0.01;
  std::size_t candidate_cap = 4096;
};

inline double gp_score(const Prediction& p, double f_star, GpAcquire fn, const GpAcquireParams& params) {
  switch (fn) {
    case GpAcquire::Ucb: return ucb(p.mu, p.sigma, params.kappa);
    case GpAcquire::Pi: return probability_of_improvement(p.mu, p.sigma, f_star, params.epsilon);
    case GpAcquire::Ei: return expected_improvement(p.mu, p.sigma, f_star, params.epsilon);
  }
  return 0;
}

/// Pool rows to score: everything up to the cap, else a seeded subsample
/// drawn from the id-sorted pool (so pool order never matters).
inline std::vector<RowId> candidate_set(std::span<const RowId> pool, std::size_t cap, Rng& rng) {
  std::vector<RowId> ids(pool.begin(), pool.end());
  std::sort(ids.begin(), ids.end());
  if (ids.size() <= cap) return ids;
  auto picks = rng.sample_without_replacement(ids.size(), cap);
  std::vector<RowId> out;
  out.reserve(cap);
  for (std::size_t i : picks) out.push_back(ids[i]);
  std::sort(out.begin(), out.end());
  return out;
}

inline RowId acquire_gp(const GpModel& m, double f_star, std::span<const RowId> pool, const Dataset& ds,
                        const Encoding& enc, GpAcquire fn, const GpAcquireParams& params, Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("acquire: empty pool");
  const auto candidates = candidate_set(pool, params.candidate_cap, rng);
  RowId best_id = candidates.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (RowId id : candidates) {
    const double s = gp_score(m.predict(enc.encode(ds.row(id).x)), f_star, fn, params);
    if (s > best_score) {  // ascending ids: first max wins ties
      best_score = s;
      best_id = id;
    }
  }
  return best_id;
}

}  // namespace frugal
