#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "arena/ratings.hpp"
#include "test_support.hpp"

using namespace arena;
using namespace arena::ratings;

namespace {

MatchRecord record(GameKind game, const std::vector<std::string>& keys, const std::vector<double>& rewards,
                   std::uint64_t seed, Framing framing = Framing::A, bool comm = true) {
  MatchRecord r;
  r.spec = testsupport::make_spec(game, keys, seed, 10, comm, framing);
  r.spec.match_id = "e" + std::to_string(seed);
  for (std::size_t i = 0; i < keys.size(); ++i) r.rewards[r.spec.roster[i].name] = rewards[i];
  return r;
}

PairwiseComparison cmp(std::string i, std::string j, double y, GameKind g = GameKind::HUPI) {
  PairwiseComparison c;
  c.i = std::move(i);
  c.j = std::move(j);
  c.outcome = y;
  c.game = g;
  c.size = 2;
  return c;
}

// Comparisons drawn from known ratings: random pairs, Bernoulli outcomes.
std::vector<PairwiseComparison> synthetic(const std::map<std::string, double>& truth, int n, std::uint64_t seed,
                                          GameKind game = GameKind::HUPI) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> names;
  for (const auto& [k, v] : truth) names.push_back(k);
  std::vector<PairwiseComparison> out;
  for (int t = 0; t < n; ++t) {
    const auto a = rng() % names.size();
    auto b = rng() % (names.size() - 1);
    if (b >= a) ++b;
    // Reference probability straight from the logistic formula.
    const double p = 1.0 / (1.0 + std::pow(10.0, (truth.at(names[b]) - truth.at(names[a])) / 400.0));
    const double y = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p ? 1.0 : 0.0;
    out.push_back(cmp(names[a], names[b], y, game));
  }
  return out;
}

}  // namespace

// ---- probabilities ----------------------------------------------------------------

TEST(Elo, ProbabilityExamples) {
  EXPECT_DOUBLE_EQ(elo_prob(1500, 1500), 0.5);
  EXPECT_NEAR(elo_prob(1600, 1400), 0.7597469266479578, 1e-15);
  EXPECT_NEAR(elo_prob(1400, 1600), 0.2402530733520421, 1e-15);
}

TEST(Elo, ComplementIsExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(500.0, 2500.0);
  for (int t = 0; t < 100000; ++t) {
    const double a = u(rng), b = u(rng);
    ASSERT_EQ(elo_prob(a, b) + elo_prob(b, a), 1.0) << a << " " << b;
    ASSERT_GT(elo_prob(a, b), 0.0);
    ASSERT_LT(elo_prob(a, b), 1.0);
  }
}

TEST(Elo, TranslationInvariance) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(700.0, 2300.0), shift(-500.0, 500.0);
  for (int t = 0; t < 10000; ++t) {
    const double a = u(rng), b = u(rng), s = shift(rng);
    ASSERT_NEAR(elo_prob(a, b), elo_prob(a + s, b + s), 1e-12);
  }
}

// ---- extraction -------------------------------------------------------------------

TEST(Extract, CoplayOrderingAndTies) {
  const std::vector<MatchRecord> recs{record(GameKind::HUPI, {"A", "B", "C"}, {5, 3, 3}, 1)};
  const auto c = extract_comparisons(recs);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].i, "A");
  EXPECT_EQ(c[0].j, "B");
  EXPECT_EQ(c[0].outcome, 1.0);
  EXPECT_EQ(c[1].i, "A");
  EXPECT_EQ(c[1].j, "C");
  EXPECT_EQ(c[1].outcome, 1.0);
  EXPECT_EQ(c[2].i, "B");
  EXPECT_EQ(c[2].j, "C");
  EXPECT_EQ(c[2].outcome, 0.5);
  for (const auto& x : c) {
    EXPECT_EQ(x.source, Source::Coplay);
    EXPECT_EQ(x.size, 3);
    EXPECT_EQ(x.event_i, "e1");
  }
}

TEST(Extract, ParallelEventsCompareFocals) {
  const std::vector<MatchRecord> recs{record(GameKind::HUPI, {"A", "B", "C"}, {4, 1, 1}, 1),
                                      record(GameKind::HUPI, {"D", "B", "C"}, {2, 5, 0}, 2)};
  const auto all = extract_comparisons(recs);
  std::vector<PairwiseComparison> par;
  for (const auto& c : all)
    if (c.source == Source::Parallel) par.push_back(c);
  ASSERT_EQ(par.size(), 1u);
  EXPECT_EQ(par[0].i, "A");
  EXPECT_EQ(par[0].j, "D");
  EXPECT_EQ(par[0].outcome, 1.0);
  EXPECT_EQ(par[0].event_i, "e1");
  EXPECT_EQ(par[0].event_j, "e2");
  EXPECT_EQ(all.size(), 7u);

  ExtractOptions no_par;
  no_par.include_parallel = false;
  const auto co = extract_comparisons(recs, no_par);
  EXPECT_EQ(co.size(), 6u);
  for (const auto& c : co) EXPECT_EQ(c.source, Source::Coplay);
}

TEST(Extract, ParallelNeedsSameSizeAndFraming) {
  const std::vector<MatchRecord> size_differs{record(GameKind::HUPI, {"A", "B", "C"}, {4, 1, 1}, 1),
                                              record(GameKind::HUPI, {"D", "B", "C", "E"}, {2, 5, 0, 0}, 2)};
  for (const auto& c : extract_comparisons(size_differs)) EXPECT_EQ(c.source, Source::Coplay);
  const std::vector<MatchRecord> framing_differs{
      record(GameKind::HUPI, {"A", "B", "C"}, {4, 1, 1}, 1),
      record(GameKind::HUPI, {"D", "B", "C"}, {2, 5, 0}, 2, Framing::B)};
  for (const auto& c : extract_comparisons(framing_differs)) EXPECT_EQ(c.source, Source::Coplay);
  ExtractOptions loose;
  loose.match_framing = false;
  int par = 0;
  for (const auto& c : extract_comparisons(framing_differs, loose)) par += c.source == Source::Parallel;
  EXPECT_EQ(par, 1);
}

TEST(Extract, EveryEventYieldsPairCountCoplayComparisons) {
  std::mt19937_64 rng(4);
  const std::vector<std::string> pool{"A", "B", "C", "D", "E", "F", "G"};
  for (int t = 0; t < 500; ++t) {
    const int n = 2 + static_cast<int>(rng() % 4);
    auto keys = pool;
    std::shuffle(keys.begin(), keys.end(), rng);
    keys.resize(static_cast<std::size_t>(n));
    std::vector<double> rewards;
    for (int i = 0; i < n; ++i) rewards.push_back(static_cast<double>(rng() % 4));
    const std::vector<MatchRecord> recs{record(kAllGames[t % 5], keys, rewards, static_cast<std::uint64_t>(t))};
    ExtractOptions o;
    o.include_parallel = false;
    const auto c = extract_comparisons(recs, o);
    ASSERT_EQ(c.size(), static_cast<std::size_t>(n * (n - 1) / 2));
    for (const auto& x : c) {
      ASSERT_NE(x.i, x.j);
      ASSERT_LT(x.i, x.j);
    }
  }
}

TEST(Extract, AbortedRecordsAreIgnored) {
  auto r = record(GameKind::HUPI, {"A", "B"}, {1, 0}, 1);
  r.status = MatchStatus::Aborted;
  const std::vector<MatchRecord> recs{r};
  EXPECT_TRUE(extract_comparisons(recs).empty());
}

// ---- fitting ----------------------------------------------------------------------

TEST(Elo, RecoversSyntheticRatings) {
  const std::map<std::string, double> truth{{"hi", 1600}, {"mid", 1500}, {"lo", 1400}};
  const auto comps = synthetic(truth, 1000, 42);
  const auto fit = fit_elo(comps, false);
  EXPECT_TRUE(fit.converged);
  EXPECT_EQ(fit.ranking(), (std::vector<std::string>{"hi", "mid", "lo"}));
  double mean = 0.0;
  for (const auto& [a, w] : fit.global) {
    EXPECT_NEAR(w, truth.at(a), 30.0) << a;
    mean += w / 3.0;
  }
  EXPECT_NEAR(mean, 1500.0, 1e-6);
}

TEST(Elo, AllTiesGiveThePrior) {
  std::vector<PairwiseComparison> c;
  for (int k = 0; k < 10; ++k) {
    c.push_back(cmp("A", "B", 0.5));
    c.push_back(cmp("B", "C", 0.5));
    c.push_back(cmp("A", "C", 0.5));
  }
  const auto fit = fit_elo(c, false);
  for (const auto& [a, w] : fit.global) EXPECT_NEAR(w, 1500.0, 1e-6);
}

TEST(Elo, ClipBoundsADominantPair) {
  std::vector<PairwiseComparison> c(20, cmp("A", "B", 1.0));
  const auto fit = fit_elo(c, false);
  EXPECT_NEAR(fit.rating("A"), 2300.0, 1e-6);
  EXPECT_NEAR(fit.rating("B"), 700.0, 1e-6);
  for (const auto& [a, w] : fit.global) EXPECT_LE(std::abs(w - 1500.0), 800.0 + 1e-9);
}

TEST(Elo, DisconnectedGraphNamesComponents) {
  const std::vector<PairwiseComparison> c{cmp("A", "B", 1.0), cmp("C", "D", 0.0)};
  EXPECT_EQ(components(c).size(), 2u);
  try {
    fit_elo(c, false);
    FAIL();
  } catch (const RatingError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("{A,B}"), std::string::npos) << msg;
    EXPECT_NE(msg.find("{C,D}"), std::string::npos) << msg;
  }
}

TEST(Elo, ObjectiveNeverIncreases) {
  const std::map<std::string, double> truth{{"a", 1700}, {"b", 1550}, {"c", 1450}, {"d", 1300}};
  FitOptions o;
  o.record_objective = true;
  for (bool per_game : {false, true}) {
    auto comps = synthetic(truth, 300, 7, GameKind::HUPI);
    const auto more = synthetic(truth, 300, 8, GameKind::Coalition);
    comps.insert(comps.end(), more.begin(), more.end());
    const auto fit = fit_elo(comps, per_game, o);
    ASSERT_GT(fit.objective_trace.size(), 2u);
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
      ASSERT_LE(fit.objective_trace[k], fit.objective_trace[k - 1] + 1e-12);
  }
}

TEST(Elo, PerGameDeviationsAreAnchored) {
  // "a" is strong at HUPI and weak at Coalition; "b" the reverse.
  auto comps = synthetic({{"a", 1700}, {"b", 1400}, {"c", 1500}}, 800, 9, GameKind::HUPI);
  const auto other = synthetic({{"a", 1400}, {"b", 1700}, {"c", 1500}}, 800, 10, GameKind::Coalition);
  comps.insert(comps.end(), other.begin(), other.end());
  const auto fit = fit_elo(comps, true);
  double mean = 0.0;
  for (const auto& a : fit.agents) {
    mean += fit.rating(a) / 3.0;
    double dev = 0.0;
    int games = 0;
    for (const auto& [key, d] : fit.per_game)
      if (key.first == a) {
        dev += d;
        ++games;
      }
    EXPECT_EQ(games, 2);
    EXPECT_NEAR(dev, 0.0, 1e-6) << a;
  }
  EXPECT_NEAR(mean, 1500.0, 1e-6);
  EXPECT_GT(fit.rating("a", GameKind::HUPI), fit.rating("b", GameKind::HUPI));
  EXPECT_LT(fit.rating("a", GameKind::Coalition), fit.rating("b", GameKind::Coalition));
  EXPECT_EQ(fit.ranking(GameKind::HUPI).front(), "a");
  EXPECT_EQ(fit.ranking(GameKind::Coalition).front(), "b");
  EXPECT_NEAR(fit.prob("a", "b", GameKind::HUPI) + fit.prob("b", "a", GameKind::HUPI), 1.0, 1e-15);
}

TEST(VectorModel, ZeroVectorsGiveEvenOdds) {
  VectorRatingSet v;
  v.dim = 3;
  v.agent_vectors["a"] = {0, 0, 0};
  v.agent_vectors["b"] = {0, 0, 0};
  v.game_vectors[GameKind::HUPI] = {1, 2, 3};
  EXPECT_DOUBLE_EQ(v.prob("a", "b", GameKind::HUPI), 0.5);
}

TEST(VectorModel, OneDimensionTracksScalarElo) {
  std::map<std::string, double> truth{{"a", 1750}, {"b", 1600}, {"c", 1500}, {"d", 1400}, {"e", 1250}};
  std::vector<PairwiseComparison> comps;
  for (int g = 0; g < 5; ++g) {
    const auto part = synthetic(truth, 400, 100 + static_cast<std::uint64_t>(g), kAllGames[g]);
    comps.insert(comps.end(), part.begin(), part.end());
  }
  const auto elo = crossval(comps, Model::Elo, 5, 3);
  const auto vec = crossval(comps, Model::Vector, 5, 3, 1);
  EXPECT_NEAR(vec.mean_auc, elo.mean_auc, 0.02);
  EXPECT_GT(elo.mean_auc, 0.65);
}

TEST(VectorModel, HighDimensionOnNoiseStaysNearChance) {
  std::mt19937_64 rng(5);
  std::vector<PairwiseComparison> comps;
  const std::vector<std::string> names{"a", "b", "c", "d"};
  for (int t = 0; t < 60; ++t) {
    const auto x = rng() % 4;
    const auto y = (x + 1 + rng() % 3) % 4;
    comps.push_back(cmp(names[x], names[y], static_cast<double>(rng() % 2), kAllGames[t % 5]));
  }
  const auto fit = fit_vector_model(comps, 7);
  for (const auto& [a, w] : fit.agent_vectors) {
    ASSERT_EQ(w.size(), 7u);
    for (double v : w) EXPECT_TRUE(std::isfinite(v));
  }
  const auto cv = crossval(comps, Model::Vector, 5, 1, 7);
  EXPECT_NEAR(cv.mean_auc, 0.5, 0.15);
}

TEST(VectorModel, SeededFitIsReproducible) {
  const auto comps = synthetic({{"a", 1600}, {"b", 1500}, {"c", 1400}}, 200, 11);
  VectorFitOptions o;
  o.seed = 9;
  const auto a = fit_vector_model(comps, 2, o);
  const auto b = fit_vector_model(comps, 2, o);
  EXPECT_EQ(a.agent_vectors, b.agent_vectors);
  EXPECT_THROW(fit_vector_model(comps, 0), ArenaError);
  EXPECT_THROW(fit_vector_model(comps, 8), ArenaError);
}

// ---- evaluation -------------------------------------------------------------------

TEST(Kendall, Examples) {
  const std::vector<std::string> a{"A", "B", "C", "D"};
  const std::vector<std::string> b{"A", "C", "B", "D"};
  const std::vector<std::string> r{"D", "C", "B", "A"};
  EXPECT_DOUBLE_EQ(kendall_tau(a, a), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(a, r), -1.0);
  EXPECT_NEAR(kendall_tau(a, b), 4.0 / 6.0, 1e-15);
  const std::vector<std::string> short_list{"A", "B"};
  EXPECT_THROW(kendall_tau(a, short_list), ContractViolation);
}

TEST(Auc, Examples) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(roc_auc(s, y), 0.75);
  const std::vector<double> sep{0.1, 0.2, 0.8, 0.9};
  EXPECT_DOUBLE_EQ(roc_auc(sep, y), 1.0);
  const std::vector<double> tied{0.5, 0.5, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(roc_auc(tied, y), 0.5);
  const std::vector<int> one_class{1, 1, 1, 1};
  EXPECT_THROW(roc_auc(s, one_class), RatingError);
}

TEST(Auc, ChanceLevelForIndependentLabels) {
  std::mt19937_64 rng(6);
  std::vector<double> s;
  std::vector<int> y;
  for (int i = 0; i < 20000; ++i) {
    s.push_back(std::uniform_real_distribution<double>(0, 1)(rng));
    y.push_back(static_cast<int>(rng() % 2));
  }
  EXPECT_NEAR(roc_auc(s, y), 0.5, 0.015);
}

TEST(Auc, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 300; ++t) {
    const int n = 5 + static_cast<int>(rng() % 40);
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      // Coarse scores make ties common.
      s.push_back(static_cast<double>(rng() % 7) / 7.0);
      y.push_back(i < 2 ? i : static_cast<int>(rng() % 2));
    }
    std::vector<double> f;
    for (double v : s) f.push_back(std::exp(3.0 * v) - 10.0);
    ASSERT_DOUBLE_EQ(roc_auc(s, y), roc_auc(f, y));
    // Brute-force pair count with half credit for ties.
    double wins = 0.0, pairs = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (y[static_cast<std::size_t>(i)] == 1 && y[static_cast<std::size_t>(j)] == 0) {
          pairs += 1;
          const double a = s[static_cast<std::size_t>(i)], b = s[static_cast<std::size_t>(j)];
          wins += a > b ? 1.0 : a == b ? 0.5 : 0.0;
        }
    ASSERT_NEAR(roc_auc(s, y), wins / pairs, 1e-12);
  }
}

TEST(Auc, CurveRunsCornerToCorner) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  const auto c = roc_curve(s, y);
  ASSERT_GE(c.size(), 2u);
  EXPECT_EQ(c.front(), std::make_pair(0.0, 0.0));
  EXPECT_EQ(c.back(), std::make_pair(1.0, 1.0));
  double area = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k)
    area += (c[k].first - c[k - 1].first) * (c[k].second + c[k - 1].second) / 2.0;
  EXPECT_NEAR(area, 0.75, 1e-12);
}

TEST(Quantile, TypeSeven) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({5}, 0.975), 5.0);
}

// ---- bootstrap --------------------------------------------------------------------

TEST(Bootstrap, SeededAndSized) {
  ArenaConfig c;
  c.agents = {testsupport::bot("greedy", "greedy"), testsupport::bot("coop", "cooperator"),
              testsupport::bot("rand", "random")};
  c.sizes = {2, 3};
  c.max_rounds = 4;
  c.seed = 3;
  const auto records = testsupport::play_config(c);
  const auto a = bootstrap_ratings(records, 25, 77);
  const auto b = bootstrap_ratings(records, 25, 77);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.requested, 25);
  EXPECT_EQ(a.agents.size(), 3u);
  for (const auto& ag : a.agents) {
    EXPECT_EQ(a.samples.at(ag).size() + static_cast<std::size_t>(a.skipped), 25u);
    ASSERT_EQ(a.quantiles.at(ag).size(), 5u);
    EXPECT_TRUE(std::is_sorted(a.quantiles.at(ag).begin(), a.quantiles.at(ag).end()));
  }
  const auto other = bootstrap_ratings(records, 25, 78);
  EXPECT_NE(a.samples, other.samples);
  EXPECT_THROW(bootstrap_ratings(records, 0, 1), ContractViolation);
}
