#include <gtest/gtest.h>

#include <random>

#include "arena/core.hpp"
#include "arena/grammar.hpp"

using namespace arena;
using namespace arena::games;
using namespace arena::grammar;

namespace {

const std::vector<std::string> kNames = {"Reese", "Wren", "Onyx", "Sage", "Jules"};

GameAction random_action(GameKind kind, int n, std::mt19937_64& rng) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  switch (kind) {
    case GameKind::Survivor: {
      SurvivorAction a;
      for (int t = 0; t < n; ++t)
        if (uni(0, 2) == 0) a.attacks.emplace_back(t, uni(1, 5));
      return a;
    }
    case GameKind::TragedyOfCommons:
      return TragedyAction{std::uniform_real_distribution<double>(0.0, 100.0)(rng)};
    case GameKind::Coalition: {
      const int r = uni(0, 2);
      if (r == 0) return CoalitionAction{};
      if (r == 1) return CoalitionAction{CoalitionAction::Type::Accept, {}, uni(0, 40)};
      Split split;
      for (int m = 0; m < n; ++m)
        if (uni(0, 1)) split.emplace_back(m, std::uniform_real_distribution<double>(0.0, 100.0)(rng));
      if (split.empty()) split.emplace_back(0, 100.0);
      return CoalitionAction{CoalitionAction::Type::Propose, split, -1};
    }
    case GameKind::Scheduler:
      return SchedulerAction{uni(0, n - 1)};
    case GameKind::HUPI:
      return HupiAction{uni(1, 10 * n)};
  }
  return HupiAction{};
}

PredictionPayload random_prediction(GameKind kind, int n, std::mt19937_64& rng) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  switch (kind) {
    case GameKind::Survivor:
      return uni(0, n) == n ? SurvivorPrediction{} : SurvivorPrediction{uni(0, n - 1)};
    case GameKind::TragedyOfCommons:
      return TragedyPrediction{std::uniform_real_distribution<double>(0.0, 100.0)(rng)};
    case GameKind::Coalition:
      return CoalitionPrediction{static_cast<Stance>(uni(0, 2))};
    case GameKind::Scheduler:
      return SchedulerPrediction{uni(0, n - 1)};
    case GameKind::HUPI:
      return HupiPrediction{uni(1, 10 * n)};
  }
  return HupiPrediction{};
}

}  // namespace

TEST(Grammar, ActionRenderParseRoundTrip) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5000; ++trial) {
    const auto kind = kAllGames[trial % 5];
    const int n = 2 + (trial / 5) % 4;
    const std::span<const std::string> names(kNames.data(), static_cast<std::size_t>(n));
    const auto a = random_action(kind, n, rng);
    std::string error;
    const auto back = parse_action(render_action_block(a, names), kind, names, &error);
    ASSERT_TRUE(back) << error << "\n" << render_action_block(a, names);
    ASSERT_EQ(*back, a);
  }
}

TEST(Grammar, PredictionRenderParseRoundTrip) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 5000; ++trial) {
    const auto kind = kAllGames[trial % 5];
    const int n = 2 + (trial / 5) % 4;
    const std::span<const std::string> names(kNames.data(), static_cast<std::size_t>(n));
    const auto p = random_prediction(kind, n, rng);
    std::string error;
    const auto back = parse_prediction(render_prediction_block(p, names), kind, names, &error);
    ASSERT_TRUE(back) << error;
    ASSERT_EQ(*back, p);
  }
}

TEST(Grammar, BlockIsFoundInsideSurroundingProse) {
  const std::string text =
      "I think Wren is bluffing, so I will go high.\n\n```action\nbid=17\n```\nGood luck everyone.";
  const auto a = parse_action(text, GameKind::HUPI, kNames);
  ASSERT_TRUE(a);
  EXPECT_EQ(std::get<HupiAction>(*a).bid, 17);
  EXPECT_EQ(strip_block(text, "action"), "I think Wren is bluffing, so I will go high.\n\n\nGood luck everyone.");
}

TEST(Grammar, SurvivorAttacksByName) {
  const auto a = parse_action("```action\nattack Wren=2\nattack Onyx=1\n```", GameKind::Survivor, kNames);
  ASSERT_TRUE(a);
  EXPECT_EQ(std::get<SurvivorAction>(*a).attacks, (std::vector<std::pair<int, int>>{{1, 2}, {2, 1}}));
  const auto p = parse_prediction("```prediction\ntarget=none\n```", GameKind::Survivor, kNames);
  ASSERT_TRUE(p);
  EXPECT_FALSE(std::get<SurvivorPrediction>(*p).target);
}

TEST(Grammar, MalformedInputIsExplained) {
  std::string error;
  EXPECT_FALSE(parse_action("```action\nattack Nobody=2\n```", GameKind::Survivor, kNames, &error));
  EXPECT_NE(error.find("Nobody"), std::string::npos);
  EXPECT_FALSE(parse_action("```action\nbid=seven\n```", GameKind::HUPI, kNames, &error));
  EXPECT_FALSE(error.empty());
  EXPECT_FALSE(parse_action("```action\n```", GameKind::HUPI, kNames, &error));
  EXPECT_FALSE(parse_prediction("```prediction\nstance=maybe\n```", GameKind::Coalition, kNames, &error));
}

TEST(Grammar, GrammarDescriptionsMentionTheirBlocks) {
  for (auto k : kAllGames) {
    EXPECT_NE(action_grammar(k).find("```action"), std::string::npos);
    EXPECT_NE(prediction_grammar(k).find("```prediction"), std::string::npos);
  }
}
