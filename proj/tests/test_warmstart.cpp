#include <gtest/gtest.h>

#include <set>

#include "frugal/warmstart.hpp"
#include "helpers.hpp"

using namespace frugal;
using frugal::testing::from_csv;
using frugal::testing::load_fixture;

namespace {

class ScriptedSynthesizer final : public Synthesizer {
 public:
  explicit ScriptedSynthesizer(int failures) : failures_(failures) {}
  std::vector<SyntheticRow> synthesize(const SynthesisRequest& request) override {
    ++calls;
    if (calls <= failures_) throw SynthesisError("scripted failure");
    return mock_synthesize(request.e0, request.ds);
  }
  int calls = 0;

 private:
  int failures_;
};

Labels labeled(const Dataset& ds, std::initializer_list<RowId> ids) {
  Labels l(ds);
  for (RowId id : ids) l.label(id);
  return l;
}

}  // namespace

TEST(ColdStart, DistinctRowsAndCount) {
  auto ds = load_fixture("toy.csv");
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Labels labels(ds);
    Rng rng(seed);
    const auto got = cold_start(labels, 4, rng);
    EXPECT_EQ(got.size(), 4u);
    EXPECT_EQ(std::set<RowId>(got.begin(), got.end()).size(), 4u);
    EXPECT_EQ(labels.evaluations(), 4u);
  }
}

TEST(ColdStart, BudgetTooLarge) {
  auto ds = from_csv("A,B-\n1,1\n2,2\n3,3\n");
  Labels labels(ds);
  Rng rng(1);
  EXPECT_THROW(cold_start(labels, 5, rng), std::invalid_argument);
}

TEST(Prompt, SectionsInOrder) {
  auto ds = load_fixture("toy.csv");
  Labels labels = labeled(ds, {0, 1, 2, 3});
  const auto e0 = sort_by_chebyshev(labels.labeled(), labels);
  const auto p = build_prompt(e0, ds);
  EXPECT_NE(p.system.find("| Name | Type | Role |"), std::string::npos);
  EXPECT_NE(p.examples.find("| Class |"), std::string::npos);
  EXPECT_NE(p.task.find("Generate Two New Examples that are Better"), std::string::npos);
  EXPECT_NE(p.task.find("Generate Two New Examples that are Poorer"), std::string::npos);

  // round(sqrt(4)) = 2 Best rows, then 2 Rest rows
  const auto best_at = p.examples.find("| Best |"), rest_at = p.examples.find("| Rest |");
  ASSERT_NE(best_at, std::string::npos);
  ASSERT_NE(rest_at, std::string::npos);
  EXPECT_LT(best_at, rest_at);
  EXPECT_EQ(p.examples.find("| Best |", rest_at), std::string::npos);

  const auto msgs = p.messages();
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[0].first, "system");
  EXPECT_EQ(msgs[1].first, "user");
  EXPECT_LT(msgs[1].second.find("Given Examples"), msgs[1].second.find("Task:"));
}

TEST(Prompt, MetaListsSymbolFrequencies) {
  auto ds = load_fixture("auto93.csv");
  const auto meta = meta_table(ds);
  EXPECT_NE(meta.find("SYM"), std::string::npos);
  EXPECT_NE(meta.find("goal (minimize)"), std::string::npos);
  EXPECT_NE(meta.find("goal (maximize)"), std::string::npos);
}

TEST(Response, RoundTrip) {
  for (const char* f : {"toy.csv", "auto93.csv", "nasa93dem.csv"}) {
    auto ds = load_fixture(f);
    Labels labels = labeled(ds, {0, 1, 2, 3, 4});
    const auto e0 = sort_by_chebyshev(labels.labeled(), labels);
    const auto rows = mock_synthesize(e0, ds);
    const auto parsed = parse_response(render_response(ds, rows), ds);
    ASSERT_EQ(parsed.size(), rows.size()) << f;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_EQ(parsed[i].claim, rows[i].claim);
      // tables carry six significant digits
      for (std::size_t j = 0; j < rows[i].x.size(); ++j) {
        if (const auto* d = std::get_if<double>(&rows[i].x[j]))
          EXPECT_NEAR(std::get<double>(parsed[i].x[j]), *d, 5e-6 * std::max(1.0, std::abs(*d)));
        else
          EXPECT_EQ(parsed[i].x[j], rows[i].x[j]);
      }
    }
  }
}

TEST(Response, FreeFormMarkdown) {
  auto ds = from_csv("A,b,Y-\n0,x,1\n10,y,2\n5,x,3\n");
  const std::string text =
      "Sure! Here you go.\n\n"
      "**Better examples**\n"
      "| b | A |\n|---|:--:|\n| x | 2.5 |\n| y | 99 |\n\n"
      "Poorer ones:\n"
      "| A | b | Class |\n| - | - | - |\n| 7 | y | Rest |\n| bad | y | Rest |\n";
  const auto rows = parse_response(text, ds);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].claim, Claim::Better);
  EXPECT_EQ(std::get<double>(rows[0].x[0]), 2.5);
  EXPECT_EQ(std::get<double>(rows[1].x[0]), 10.0);  // clamped
  EXPECT_EQ(rows[2].claim, Claim::Poorer);
  EXPECT_EQ(std::get<std::string>(rows[2].x[1]), "y");
}

TEST(Response, MissingClassIsAnError) {
  auto ds = from_csv("A,Y-\n0,1\n10,2\n");
  EXPECT_THROW(parse_response("### Better\n| A |\n|---|\n| 3 |\n", ds), SynthesisError);
  EXPECT_THROW(parse_response("no tables here", ds), SynthesisError);
}

TEST(Mock, WorkedExample) {
  // chebyshev ascends with row id, so E0 order is 0, 1, 2, 3
  auto ds = from_csv("A,Y-\n0.4,1\n0.8,2\n0.2,3\n0.0,4\n1.0,5\n");
  Labels labels = labeled(ds, {0, 1, 2, 3});
  const auto e0 = sort_by_chebyshev(labels.labeled(), labels);
  ASSERT_EQ(e0, (std::vector<RowId>{0, 1, 2, 3}));
  const auto rows = mock_synthesize(e0, ds);
  ASSERT_EQ(rows.size(), 4u);
  // best-half mean (0.4 + 0.8) / 2 = 0.6; top row 0.4 moves 10% and 20% of the gap
  EXPECT_NEAR(std::get<double>(rows[0].x[0]), 0.42, 1e-12);
  EXPECT_NEAR(std::get<double>(rows[1].x[0]), 0.44, 1e-12);
  // rest-half mean (0.2 + 0.0) / 2 = 0.1; bottom row 0.0 moves toward it
  EXPECT_NEAR(std::get<double>(rows[2].x[0]), 0.01, 1e-12);
  EXPECT_NEAR(std::get<double>(rows[3].x[0]), 0.02, 1e-12);
  EXPECT_EQ(rows[0].claim, Claim::Better);
  EXPECT_EQ(rows[3].claim, Claim::Poorer);
}

TEST(Mock, GapFractions) {
  // top row 0.4, best-half mean 0.8: 0.4 -> 0.44 and 0.48
  auto ds = from_csv("A,Y-\n0.4,1\n1.2,2\n0.0,3\n0.1,4\n");
  Labels labels = labeled(ds, {0, 1, 2, 3});
  const auto rows = mock_synthesize(sort_by_chebyshev(labels.labeled(), labels), ds);
  EXPECT_NEAR(std::get<double>(rows[0].x[0]), 0.44, 1e-12);
  EXPECT_NEAR(std::get<double>(rows[1].x[0]), 0.48, 1e-12);
}

TEST(Mock, Deterministic) {
  auto ds = load_fixture("auto93.csv");
  Labels labels = labeled(ds, {5, 9, 40, 77});
  const auto e0 = sort_by_chebyshev(labels.labeled(), labels);
  EXPECT_EQ(mock_synthesize(e0, ds), mock_synthesize(e0, ds));
}

TEST(Mapping, NearestAndDedupe) {
  auto ds = from_csv("A,Y-\n0,1\n0.5,2\n1,3\n");
  std::vector<SyntheticRow> e1 = {{{0.1}, Claim::Better}, {{0.05}, Claim::Better}, {{0.9}, Claim::Poorer}};
  EXPECT_EQ(map_to_pool(e1, {0, 1, 2}, ds), (std::vector<RowId>{0, 2}));
  EXPECT_EQ(nearest({0.25}, {2, 1, 0}, ds), 0u);  // tie 0 vs 0.5 goes to the lower id
}

TEST(WarmStart, LabelsAtMostFourMore) {
  auto ds = load_fixture("pom3a.csv");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Labels labels(ds);
    Rng rng(seed);
    MockSynthesizer synth;
    const auto r = warm_start(labels, synth, rng);
    EXPECT_FALSE(r.fallback);
    EXPECT_GE(labels.evaluations(), 5u);
    EXPECT_LE(labels.evaluations(), 8u);
    EXPECT_EQ(labels.evaluations(), r.labeled.size());
  }
}

TEST(WarmStart, RespectsLabelCap) {
  auto ds = load_fixture("pom3a.csv");
  Labels labels(ds);
  Rng rng(4);
  MockSynthesizer synth;
  WarmStartOptions opt;
  opt.label_cap = 6;
  warm_start(labels, synth, rng, opt);
  EXPECT_LE(labels.evaluations(), 6u);
}

TEST(WarmStart, LiteralMappingAddsNoLabels) {
  auto ds = load_fixture("pom3a.csv");
  Labels labels(ds);
  Rng rng(4);
  MockSynthesizer synth;
  WarmStartOptions opt;
  opt.literal_mapping = true;
  warm_start(labels, synth, rng, opt);
  EXPECT_EQ(labels.evaluations(), 4u);
}

TEST(WarmStart, RetriesThenSucceeds) {
  auto ds = load_fixture("toy.csv");
  Labels labels(ds);
  Rng rng(1);
  ScriptedSynthesizer synth(2);
  const auto r = warm_start(labels, synth, rng);
  EXPECT_EQ(synth.calls, 3);
  EXPECT_FALSE(r.fallback);
  EXPECT_EQ(r.log.size(), 2u);
}

TEST(WarmStart, FallsBackAfterThreeFailures) {
  auto ds = load_fixture("toy.csv");
  Labels labels(ds);
  Rng rng(1);
  ScriptedSynthesizer synth(100);
  const auto r = warm_start(labels, synth, rng);
  EXPECT_EQ(synth.calls, 3);
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(labels.evaluations(), 4u);
}

TEST(WarmStart, ChatSynthesizerParsesReplies) {
  auto ds = load_fixture("toy.csv");
  Labels labels(ds);
  Rng rng(2);
  std::string seen;
  ChatSynthesizer synth([&](const PromptBundle& p) {
    seen = p.task;
    const auto lab = labels.labeled();
    return render_response(ds, mock_synthesize(sort_by_chebyshev(lab, labels), ds));
  });
  const auto r = warm_start(labels, synth, rng);
  EXPECT_FALSE(r.fallback);
  EXPECT_NE(seen.find("Generate Two New Examples"), std::string::npos);
  EXPECT_GT(labels.evaluations(), 4u);
}

TEST(Mapping, TenRowPoolMatchesBruteForce) {
  auto ds = load_fixture("auto93.csv");
  Rng rng(17);
  std::mt19937 gen(17);
  std::uniform_int_distribution<RowId> any(0, ds.size() - 1);
  for (int t = 0; t < 50; ++t) {
    std::vector<RowId> pool;
    for (auto i : rng.sample_without_replacement(ds.size(), 10)) pool.push_back(i);
    const auto& x = ds.row(any(gen)).x;
    RowId want = pool[0];
    for (RowId id : pool) {
      const double d = x_distance(x, ds.row(id).x, ds), w = x_distance(x, ds.row(want).x, ds);
      if (d < w || (d == w && id < want)) want = id;
    }
    EXPECT_EQ(nearest(x, pool, ds), want);
  }
}

TEST(WarmStart, MockReachesPastTheColdSet) {
  // goal peaks at A = 0.5; cold rows 0.3, 0.8, 0.0, 1.0 put the best-half mean
  // at 0.55, next to the global best (row 5); the nudged top row maps to 0.35
  auto ds = from_csv("A,Y-\n0.3,0.2\n0.8,0.3\n0.0,0.5\n1.0,0.5\n0.35,0.15\n0.55,0.05\n0.9,0.4\n0.1,0.4\n");
  Labels labels = labeled(ds, {0, 1, 2, 3});
  const auto e0 = sort_by_chebyshev(labels.labeled(), labels);
  const auto mapped = map_to_pool(mock_synthesize(e0, ds), labels.unlabeled(), ds);
  double cold = 1;
  for (RowId id : e0) cold = std::min(cold, chebyshev(id, labels));
  double warm = 1;
  for (RowId id : mapped) {
    labels.label(id);
    warm = std::min(warm, chebyshev(id, labels));
  }
  EXPECT_LT(warm, cold);
}
