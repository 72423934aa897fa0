#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "frugal/likelihood.hpp"
#include "helpers.hpp"

using namespace frugal;
using frugal::testing::from_csv;
using frugal::testing::load_fixture;

namespace {

BestRestSplit split_of(const std::vector<RowId>& best, const std::vector<RowId>& rest) { return {best, rest}; }

}  // namespace

TEST(Frequencies, LaplaceSmoothing) {
  // best has {a, a}; alphabet {a, b}: (2+1)/(2+2) = 0.75, b -> 0.25
  auto ds = from_csv("s,Y-\na,1\na,2\nb,3\nb,4\n");
  auto m = TwoClassModel::fit(split_of({0, 1}, {2, 3}), ds);
  const auto& f = std::get<Frequencies>(m.best().columns[0]);
  EXPECT_DOUBLE_EQ(f.prob("a"), 0.75);
  EXPECT_DOUBLE_EQ(f.prob("b"), 0.25);
}

TEST(Frequencies, HalfWhenEvenlySplit) {
  // best = {a, b}, alphabet {a, b}: (1+1)/(2+2) = 0.5
  auto ds = from_csv("s,Y-\na,1\nb,2\nb,3\nb,4\n");
  auto m = TwoClassModel::fit(split_of({0, 1}, {2, 3}), ds);
  EXPECT_DOUBLE_EQ(std::get<Frequencies>(m.best().columns[0]).prob("a"), 0.5);
}

TEST(Gaussian, FloorAndClosedForm) {
  auto ds = from_csv("A,Y-\n0,1\n0,2\n1,3\n0.5,4\n");
  auto m = TwoClassModel::fit(split_of({0, 1}, {2, 3}), ds);
  const auto& g = std::get<Gaussian>(m.best().columns[0]);
  EXPECT_DOUBLE_EQ(g.sd, kSdFloor);
  EXPECT_DOUBLE_EQ(g.mean, 0.0);

  const Gaussian h{0.25, 0.5};
  const double z = (0.75 - 0.25) / 0.5;
  EXPECT_NEAR(h.pdf(0.75), std::exp(-0.5 * z * z) / (0.5 * std::sqrt(2 * std::numbers::pi)), 1e-15);
  EXPECT_NEAR(std::exp(h.log_pdf(0.75)), h.pdf(0.75), 1e-15);
}

TEST(Gaussian, SampleStandardDeviation) {
  // normalized values 0, 0.5, 1 -> mean 0.5, sample sd 0.5
  auto ds = from_csv("A,Y-\n0,1\n5,2\n10,3\n7,9\n");
  auto m = TwoClassModel::fit(split_of({0, 1, 2}, {3}), ds);
  const auto& g = std::get<Gaussian>(m.best().columns[0]);
  EXPECT_NEAR(g.mean, 0.5, 1e-12);
  EXPECT_NEAR(g.sd, 0.5, 1e-12);
}

TEST(TwoClass, EmptyClassThrows) {
  auto ds = load_fixture("toy.csv");
  EXPECT_THROW(TwoClassModel::fit(split_of({}, {0, 1}), ds), std::invalid_argument);
  EXPECT_THROW(TwoClassModel::fit(split_of({0}, {}), ds), std::invalid_argument);
}

TEST(TwoClass, PriorsSumToOne) {
  auto ds = load_fixture("toy.csv");
  auto m = TwoClassModel::fit(split_of({0, 1}, {2, 3, 4, 5}), ds);
  EXPECT_DOUBLE_EQ(m.best().prior + m.rest().prior, 1.0);
  EXPECT_DOUBLE_EQ(m.best().prior, 2.0 / 6.0);
}

TEST(TwoClass, LogPathMatchesDirectProduct) {
  auto ds = load_fixture("auto93.csv");
  std::mt19937 gen(7);
  std::uniform_int_distribution<RowId> pick(0, ds.size() - 1);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<RowId> best, rest;
    for (int i = 0; i < 4; ++i) best.push_back(pick(gen));
    for (int i = 0; i < 12; ++i) rest.push_back(pick(gen));
    auto m = TwoClassModel::fit(split_of(best, rest), ds);
    for (int k = 0; k < 10; ++k) {
      const auto& x = ds.row(pick(gen)).x;
      const double direct = TwoClassModel::direct_like(m.best(), x, ds);
      if (!(direct > 1e-250)) continue;
      EXPECT_NEAR(std::exp(TwoClassModel::log_like(m.best(), x, ds)) / direct, 1.0, 1e-9);
    }
  }
}

TEST(TwoClass, MissingCellsAreSkipped) {
  auto ds = from_csv("A,B,Y-\n0,0,1\n1,1,2\n0.5,0.2,3\n1,0.9,4\n?,0.1,5\n");
  auto m = TwoClassModel::fit(split_of({0, 2}, {1, 3}), ds);
  std::vector<Cell> only_b = {std::monostate{}, 0.1};
  const auto& g = std::get<Gaussian>(m.best().columns[1]);
  const double expected = std::log(m.best().prior) + g.log_pdf(norm(ds.num_stats(1), 0.1));
  EXPECT_NEAR(TwoClassModel::log_like(m.best(), only_b, ds), expected, 1e-12);
}

TEST(Acquisitions, Examples) {
  EXPECT_NEAR(explore(0.6, 0.4), 5.0, 1e-12);
  EXPECT_NEAR(exploit(0.6, 0.4), 1.5, 1e-12);
  EXPECT_NEAR(explore_signed(0.4, 0.6), -5.0, 1e-12);
  EXPECT_GT(exploit(1e-300, 0), 0);
  EXPECT_TRUE(std::isfinite(explore(0.5, 0.5)));
}

TEST(Acquisitions, ExploreSymmetricExploitNot) {
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(0.01, 1);
  for (int i = 0; i < 200; ++i) {
    const double b = u(gen), r = u(gen);
    EXPECT_NEAR(explore(b, r), explore(r, b), 1e-9 * explore(b, r));
    if (std::abs(b - r) > 1e-3) EXPECT_NE(exploit(b, r), exploit(r, b));
  }
}

TEST(Acquisitions, LogExploitIsMonotoneInExploit) {
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> u(-40, 0);
  for (int i = 0; i < 500; ++i) {
    Likelihoods a{0, 0, u(gen), u(gen)}, b{0, 0, u(gen), u(gen)};
    const double ea = exploit(std::exp(a.log_best), std::exp(a.log_rest));
    const double eb = exploit(std::exp(b.log_best), std::exp(b.log_rest));
    if (std::abs(ea - eb) > 1e-9 * std::max(ea, eb)) EXPECT_EQ(ea > eb, log_exploit(a) > log_exploit(b));
  }
}

TEST(AcquireTpe, PicksLikeliestBestRow) {
  // best rows sit near A = 0; pool row 4 (A = 0.05) should win exploit
  auto ds = from_csv("A,Y-\n0,1\n0.1,2\n0.9,8\n1,9\n0.05,0\n0.8,0\n0.5,0\n");
  auto m = TwoClassModel::fit(split_of({0, 1}, {2, 3}), ds);
  std::vector<RowId> pool = {4, 5, 6};
  EXPECT_EQ(acquire_tpe(m, pool, ds, TpeAcquire::Exploit), 4u);
}

TEST(AcquireTpe, TiesGoToLowestId) {
  auto ds = from_csv("A,Y-\n0,1\n1,2\n0.5,3\n0.5,4\n0.5,5\n");
  auto m = TwoClassModel::fit(split_of({0}, {1}), ds);
  std::vector<RowId> pool = {4, 3, 2};
  EXPECT_EQ(acquire_tpe(m, pool, ds, TpeAcquire::Explore), 2u);
  EXPECT_EQ(acquire_tpe(m, pool, ds, TpeAcquire::Exploit), 2u);
}

TEST(AcquireTpe, EmptyPoolThrows) {
  auto ds = load_fixture("toy.csv");
  auto m = TwoClassModel::fit(split_of({0}, {1}), ds);
  std::vector<RowId> pool;
  EXPECT_THROW(acquire_tpe(m, pool, ds, TpeAcquire::Exploit), std::invalid_argument);
}

TEST(AcquireTpe, FiftyRowPoolMatchesBruteForce) {
  auto ds = load_fixture("auto93.csv");
  std::mt19937 gen(11);
  std::vector<RowId> ids(ds.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), gen);
  auto m = TwoClassModel::fit(split_of({ids[0], ids[1], ids[2]}, {ids[3], ids[4], ids[5], ids[6], ids[7]}), ds);
  const std::vector<RowId> pool(ids.begin() + 8, ids.begin() + 58);

  // likelihood recomputed from the fitted parameters
  auto like = [&](const ClassModel& c, RowId id) {
    double p = c.prior;
    for (std::size_t j = 0; j < ds.x_columns().size(); ++j) {
      const Cell& v = ds.row(id).x[j];
      if (is_missing(v)) continue;
      if (const auto* g = std::get_if<Gaussian>(&c.columns[j])) {
        const double z = (norm(ds.num_stats(ds.x_columns()[j]), std::get<double>(v)) - g->mean) / g->sd;
        p *= std::exp(-0.5 * z * z) / (g->sd * std::sqrt(2 * std::numbers::pi));
      } else if (const auto* f = std::get_if<Frequencies>(&c.columns[j])) {
        const auto it = f->counts.find(std::get<std::string>(v));
        const double k = it == f->counts.end() ? 0 : static_cast<double>(it->second);
        p *= (k + 1) / (static_cast<double>(f->n) + static_cast<double>(f->alphabet));
      }
    }
    return p;
  };
  for (TpeAcquire fn : {TpeAcquire::Exploit, TpeAcquire::Explore}) {
    auto score = [&](RowId id) {
      const double b = like(m.best(), id), r = like(m.rest(), id);
      return fn == TpeAcquire::Exploit ? b / (r + 1e-30) : std::abs(b + r) / (std::abs(b - r) + 1e-30);
    };
    double top = -1;
    for (RowId id : pool) top = std::max(top, score(id));
    const RowId pick = acquire_tpe(m, pool, ds, fn);
    EXPECT_NEAR(score(pick), top, 1e-9 * top);
  }
}

TEST(AcquireTpe, CentroidDuplicateWinsExploit) {
  // row 6 sits exactly at the best-class mean (0.1, 0.1)
  auto ds = from_csv("A,B,Y-\n0,0.2,1\n0.2,0,2\n0.9,0.8,8\n1,1,9\n0.7,0.9,7\n0.3,0.35,5\n0.1,0.1,0\n0.5,0.5,0\n");
  auto m = TwoClassModel::fit(split_of({0, 1}, {2, 3, 4}), ds);
  std::vector<RowId> pool = {5, 6, 7};
  EXPECT_EQ(acquire_tpe(m, pool, ds, TpeAcquire::Exploit), 6u);
}
