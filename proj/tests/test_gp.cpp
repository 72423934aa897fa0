#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "frugal/gp.hpp"
#include "frugal/random.hpp"
#include "helpers.hpp"

using namespace frugal;
using frugal::testing::from_csv;
using frugal::testing::load_fixture;

namespace {

GpModel fit_1d(const std::vector<double>& xs, const std::vector<double>& ys, const GpOptions& opt = {}) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::VectorXd y(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = xs[i], y[static_cast<Eigen::Index>(i)] = ys[i];
  return GpModel::fit(x, y, opt);
}

Eigen::VectorXd at(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST(GpModel, TwoPointClosedForm) {
  // targets 0.2, 0.8: mean 0.5, s^2 = 0.09; single length scale 0.3
  GpOptions opt;
  opt.length_scales = {0.3};
  auto m = fit_1d({0.0, 1.0}, {0.2, 0.8}, opt);
  EXPECT_DOUBLE_EQ(m.prior_mean(), 0.5);
  EXPECT_NEAR(m.signal_variance(), 0.09, 1e-15);

  // independent closed form of the 2x2 posterior
  const double s2 = 0.09, ell = 0.3, j = m.noise();
  const double k01 = s2 * std::exp(-1.0 / (2 * ell * ell));
  const double a = s2 + j, det = a * a - k01 * k01;
  const double x = 0.4;
  const double k0 = s2 * std::exp(-(x * x) / (2 * ell * ell));
  const double k1 = s2 * std::exp(-((x - 1) * (x - 1)) / (2 * ell * ell));
  // K^-1 = [a -k01; -k01 a] / det, centered targets (-0.3, 0.3)
  const double alpha0 = (a * -0.3 - k01 * 0.3) / det, alpha1 = (-k01 * -0.3 + a * 0.3) / det;
  const double mu = 0.5 + k0 * alpha0 + k1 * alpha1;
  const double quad = (k0 * (a * k0 - k01 * k1) + k1 * (-k01 * k0 + a * k1)) / det;
  const auto p = m.predict(at(x));
  EXPECT_NEAR(p.mu, mu, 1e-9);
  EXPECT_NEAR(p.sigma, std::sqrt(s2 - quad), 1e-9);
}

TEST(GpModel, InterpolatesTrainingPoints) {
  std::vector<double> xs, ys;
  for (int i = 0; i < 8; ++i) xs.push_back(i / 7.0), ys.push_back(std::cos(3 * xs.back()));
  auto m = fit_1d(xs, ys);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto p = m.predict(at(xs[i]));
    EXPECT_NEAR(p.mu, ys[i], 1e-3);
    EXPECT_LE(p.sigma, std::sqrt(m.noise()) + 1e-6);
  }
}

TEST(GpModel, FarAwayRevertsToPrior) {
  auto m = fit_1d({0.0, 0.1, 0.2}, {0.1, 0.5, 0.3});
  const auto p = m.predict(at(100.0));
  EXPECT_NEAR(p.mu, m.prior_mean(), 1e-9);
  EXPECT_NEAR(p.sigma, std::sqrt(m.signal_variance()), 1e-9);
  const auto near = m.predict(at(0.1));
  EXPECT_LE(near.sigma, p.sigma);
}

TEST(GpModel, SigmaGrowsAwayFromData) {
  auto m = fit_1d({0.0, 0.5, 1.0}, {0.2, 0.9, 0.4});
  for (double x : {0.0, 0.5, 1.0})
    EXPECT_LE(m.predict(at(x)).sigma, m.predict(at(1.0 + 3 * m.length_scale())).sigma);
}

TEST(GpModel, ChoosesMaximumMarginalLikelihood) {
  std::vector<double> xs, ys;
  for (int i = 0; i < 10; ++i) xs.push_back(i / 9.0), ys.push_back(std::sin(6 * xs.back()));
  const auto chosen = fit_1d(xs, ys);
  for (double ell : {0.1, 0.3, 1.0, 3.0}) {
    GpOptions one;
    one.length_scales = {ell};
    EXPECT_GE(chosen.log_marginal_likelihood(), fit_1d(xs, ys, one).log_marginal_likelihood() - 1e-9);
  }
}

TEST(GpModel, DuplicateInputsNeedJitter) {
  auto m = fit_1d({0.3, 0.3, 0.3, 0.7}, {0.5, 0.5, 0.5, 0.1});
  EXPECT_GE(m.noise(), 1e-6);
  EXPECT_LE(m.noise(), 1e-2);
  EXPECT_TRUE(std::isfinite(m.predict(at(0.5)).mu));
}

TEST(GpModel, TooFewPoints) { EXPECT_THROW(fit_1d({0.5}, {1.0}), ModelFitError); }

TEST(Acquisition, ProbabilityOfImprovement) {
  EXPECT_NEAR(probability_of_improvement(1.0, 1.0, 0.0, 0.0), 0.8413447460685429, 1e-12);
  EXPECT_NEAR(probability_of_improvement(0.51, 0.2, 0.5, 0.01), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(probability_of_improvement(0.2, 0.0, 0.5, 0.01), 0.0);
}

TEST(Acquisition, ExpectedImprovement) {
  EXPECT_NEAR(expected_improvement(0.01, 1.0, 0.0, 0.01), 0.3989422804014327, 1e-12);
  EXPECT_DOUBLE_EQ(expected_improvement(5.0, 0.0, 0.0, 0.01), 0.0);
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(-2, 2), s(0.01, 2);
  for (int i = 0; i < 500; ++i) EXPECT_GE(expected_improvement(u(gen), s(gen), u(gen), 0.01), 0.0);
}

TEST(Acquisition, ExpectedImprovementMatchesQuadrature) {
  // E[max(0, Y - f* - eps)] for Y ~ N(mu, sigma), integrated numerically
  for (auto [mu, sigma, f] : {std::tuple{0.3, 0.2, 0.4}, std::tuple{0.7, 0.05, 0.5}, std::tuple{0.0, 1.0, 1.0}}) {
    double acc = 0;
    const int n = 200000;
    const double lo = mu - 10 * sigma, hi = mu + 10 * sigma, h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
      const double y = lo + (i + 0.5) * h;
      acc += std::max(0.0, y - f - 0.01) * std::exp(-0.5 * std::pow((y - mu) / sigma, 2)) /
             (sigma * std::sqrt(2 * std::numbers::pi)) * h;
    }
    EXPECT_NEAR(expected_improvement(mu, sigma, f, 0.01), acc, 1e-6);
  }
}

TEST(Acquisition, Ucb) {
  EXPECT_DOUBLE_EQ(ucb(0.5, 0.1, 2.0), 0.7);
  EXPECT_DOUBLE_EQ(ucb(0.5, 0.1, 0.0), 0.5);
}

TEST(Encoding, NumericAndOneHot) {
  auto ds = from_csv("A,s,Y-\n0,x,1\n10,y,2\n?,x,3\n");
  Encoding enc(ds);
  ASSERT_EQ(enc.width(), 3u);
  auto v = enc.encode(ds.row(1).x);
  EXPECT_DOUBLE_EQ(v[0], 1.0);
  EXPECT_DOUBLE_EQ(v[1], 0.0);
  EXPECT_DOUBLE_EQ(v[2], 1.0);
  EXPECT_DOUBLE_EQ(enc.encode(ds.row(2).x)[0], 0.5);
}

TEST(CandidateSet, CapAndOrderIndependence) {
  std::vector<RowId> pool(5000);
  for (RowId i = 0; i < pool.size(); ++i) pool[i] = i;
  std::vector<RowId> reversed(pool.rbegin(), pool.rend());
  Rng a(9), b(9);
  const auto ca = candidate_set(pool, 4096, a), cb = candidate_set(reversed, 4096, b);
  EXPECT_EQ(ca.size(), 4096u);
  EXPECT_EQ(ca, cb);
  Rng c(9);
  std::vector<RowId> small(pool.begin(), pool.begin() + 100);
  EXPECT_EQ(candidate_set(small, 4096, c), small);
}

TEST(AcquireGp, PrefersHighMeanUnderUcb) {
  auto ds = load_fixture("SS-A.csv");
  Labels labels(ds);
  Rng rng(3);
  for (std::size_t i : rng.sample_without_replacement(ds.size(), 12)) labels.label(i);
  Encoding enc(ds);
  const auto m = fit_gp(labels.labeled(), labels, enc);
  const auto pool = labels.unlabeled();
  GpAcquireParams params;
  const RowId pick = acquire_gp(m, incumbent(labels.labeled(), labels), pool, ds, enc, GpAcquire::Ucb, params, rng);
  const double chosen = ucb(m.predict(enc.encode(ds.row(pick).x)).mu, m.predict(enc.encode(ds.row(pick).x)).sigma, 2);
  for (RowId id : pool) {
    const auto p = m.predict(enc.encode(ds.row(id).x));
    EXPECT_LE(ucb(p.mu, p.sigma, 2), chosen + 1e-12);
  }
  EXPECT_FALSE(labels.is_labeled(pick));
}

TEST(AcquireGp, FiftyRowPoolMatchesBruteForce) {
  auto ds = load_fixture("pom3a.csv");
  Labels labels(ds);
  Rng rng(21);
  const auto picks = rng.sample_without_replacement(ds.size(), 60);
  for (std::size_t i = 0; i < 10; ++i) labels.label(picks[i]);
  std::vector<RowId> pool(picks.begin() + 10, picks.end());
  Encoding enc(ds);
  const auto m = fit_gp(labels.labeled(), labels, enc);
  const double f_star = incumbent(labels.labeled(), labels);
  GpAcquireParams params;
  auto phi = [](double z) { return std::exp(-z * z / 2) / std::sqrt(2 * std::numbers::pi); };
  auto cdf = [](double z) { return 0.5 * (1 + std::erf(z / std::sqrt(2.0))); };
  for (GpAcquire fn : {GpAcquire::Ucb, GpAcquire::Pi, GpAcquire::Ei}) {
    auto score = [&](RowId id) {
      const auto p = m.predict(enc.encode(ds.row(id).x));
      const double d = p.mu - f_star - 0.01;
      if (fn == GpAcquire::Ucb) return p.mu + 2 * p.sigma;
      if (p.sigma <= 0) return fn == GpAcquire::Pi && d > 0 ? 1.0 : 0.0;
      const double z = d / p.sigma;
      return fn == GpAcquire::Pi ? cdf(z) : d * cdf(z) + p.sigma * phi(z);
    };
    RowId want = pool.front();
    for (RowId id : pool)
      if (score(id) > score(want) || (score(id) == score(want) && id < want)) want = id;
    const RowId got = acquire_gp(m, f_star, pool, ds, enc, fn, params, rng);
    EXPECT_NEAR(score(got), score(want), 1e-12) << static_cast<int>(fn);
  }
}
