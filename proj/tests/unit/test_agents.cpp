#include <gtest/gtest.h>

#include <random>
#include <set>

#include "arena/grammar.hpp"
#include "arena/prompts.hpp"
#include "arena/scripted.hpp"
#include "test_support.hpp"

using namespace arena;
using namespace arena::games;

namespace {

StageContext context_for(GameKind kind, int n, int seat, Stage stage, Framing framing = Framing::A) {
  StageContext c;
  c.match_id = "m-test";
  c.game = kind;
  c.framing = framing;
  c.seat = seat;
  c.stage = stage;
  c.names = draw_display_names(n, 99);
  c.view = redact(new_state(kind, n, 10), seat);
  c.seed = 1234;
  return c;
}

std::string joined(const std::vector<llm::ChatMessage>& prompt) {
  std::string all;
  for (const auto& m : prompt) all += m.role + "\n" + m.content + "\n";
  return all;
}

// Independent HUPI oracle: winning chance of `bid` against opponents that
// each draw from `dist`, by enumerating every opponent bid tuple.
double brute_win_probability(int bid, int opponents, const std::vector<double>& dist) {
  const int m = static_cast<int>(dist.size());
  std::vector<int> others(static_cast<std::size_t>(opponents), 1);
  double total = 0.0;
  while (true) {
    double p = 1.0;
    for (int o : others) p *= dist[static_cast<std::size_t>(o - 1)];
    std::vector<int> all = others;
    all.push_back(bid);
    int best = 0, who = -1;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (std::count(all.begin(), all.end(), all[i]) == 1 && all[i] > best) {
        best = all[i];
        who = static_cast<int>(i);
      }
    if (who == opponents) total += p;
    int k = 0;
    while (k < opponents && ++others[static_cast<std::size_t>(k)] > m) others[static_cast<std::size_t>(k++)] = 1;
    if (k == opponents) break;
  }
  return total;
}

}  // namespace

TEST(Scripted, GreedyTakesTheWholeStock) {
  const auto greedy = scripted::make_scripted({{"bot", "greedy"}});
  const auto ctx = context_for(GameKind::TragedyOfCommons, 4, 0, Stage::Act);
  const auto b = greedy->act(ctx);
  ASSERT_TRUE(b.action);
  EXPECT_DOUBLE_EQ(std::get<TragedyAction>(*b.action).extraction, 100.0);
  EXPECT_FALSE(b.reasoning.empty());
}

TEST(Scripted, GreedyAnnouncesItsHaul) {
  const auto greedy = scripted::make_scripted({{"bot", "greedy"}});
  const auto ctx = context_for(GameKind::TragedyOfCommons, 2, 0, Stage::Communicate);
  const auto m = greedy->converse(ctx, 1, {});
  EXPECT_NE(m.text.find("100"), std::string::npos) << m.text;
  EXPECT_NE(m.text.find(scripted::kIntentTag), std::string::npos);
}

TEST(Scripted, CooperatorTakesTheSustainableShare) {
  const auto coop = scripted::make_scripted({{"bot", "cooperator"}});
  for (int n = 2; n <= 5; ++n) {
    const auto b = coop->act(context_for(GameKind::TragedyOfCommons, n, 0, Stage::Act));
    ASSERT_TRUE(b.action);
    // Total haul h keeps the stock level when 1.5 * (100 - h) = 100.
    const double sustainable = 100.0 - 100.0 / 1.5;
    EXPECT_NEAR(std::get<TragedyAction>(*b.action).extraction, sustainable / n, 1e-12);
  }
}

TEST(Scripted, SustainableTotalHaulKeepsTheStock) {
  auto s = new_state(GameKind::TragedyOfCommons, 3, 10);
  const auto coop = scripted::make_scripted({{"bot", "cooperator"}});
  for (int r = 0; r < 10; ++r) {
    std::vector<std::optional<GameAction>> acts;
    for (int i = 0; i < 3; ++i) {
      auto ctx = context_for(GameKind::TragedyOfCommons, 3, i, Stage::Act);
      ctx.view = redact(s, i);
      ctx.round = s.round;
      acts.push_back(*coop->act(ctx).action);
    }
    s = apply_round(s, acts).first;
    EXPECT_NEAR(s.as<TragedyState>().stock, 100.0, 1e-9);
  }
}

TEST(Scripted, KLevelOneMatchesBruteForceBestResponse) {
  for (int n = 2; n <= 3; ++n) {
    const int m = 10 * n;
    const std::vector<double> uniform(static_cast<std::size_t>(m), 1.0 / m);
    double best = -1.0;
    int best_bid = 0;
    for (int b = 1; b <= m; ++b) {
      const double p = brute_win_probability(b, n - 1, uniform);
      if (p >= best - 1e-15) {
        best = std::max(best, p);
        best_bid = b;
      }
    }
    EXPECT_EQ(scripted::klevel_bid(1, n, m), best_bid) << "n=" << n;
    const auto bot = scripted::make_scripted({{"bot", "klevel"}, {"k", 1}});
    const auto b = bot->act(context_for(GameKind::HUPI, n, 0, Stage::Act));
    EXPECT_EQ(std::get<HupiAction>(*b.action).bid, best_bid);
  }
  EXPECT_EQ(scripted::klevel_bid(1, 2, 20), 20);
}

TEST(Scripted, HupiWinProbabilityMatchesEnumeration) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 5);
    const int opp = 1 + static_cast<int>(rng() % 3);
    std::vector<double> dist(static_cast<std::size_t>(m));
    double z = 0.0;
    for (auto& d : dist) z += d = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (auto& d : dist) d /= z;
    for (int b = 1; b <= m; ++b)
      ASSERT_NEAR(scripted::hupi_win_probability(b, opp, dist), brute_win_probability(b, opp, dist), 1e-12);
  }
}

TEST(Scripted, MirrorPredictsTheLastActionFacet) {
  const auto mirror = scripted::make_scripted({{"bot", "mirror"}});
  auto ctx = context_for(GameKind::HUPI, 3, 0, Stage::Predict);
  EXPECT_EQ(mirror->predict(ctx, 1).payload, neutral_prediction(ctx.view, 1));
  auto s = new_state(GameKind::HUPI, 3, 10);
  auto [next, out] = apply_round(s, std::vector<std::optional<GameAction>>{HupiAction{4}, HupiAction{17}, HupiAction{9}});
  ctx.history = {out};
  ctx.view = redact(next, 0);
  ctx.round = 1;
  EXPECT_EQ(mirror->predict(ctx, 1).payload, PredictionPayload{HupiPrediction{17}});
  EXPECT_EQ(mirror->predict(ctx, 2).payload, PredictionPayload{HupiPrediction{9}});
}

TEST(Scripted, SilentBotSaysNothing) {
  const auto silent = scripted::make_scripted({{"bot", "silent"}});
  EXPECT_EQ(silent->converse(context_for(GameKind::HUPI, 2, 0, Stage::Communicate), 1, {}).text, "");
}

TEST(Scripted, BotsAreDeterministicGivenSeedAndContext) {
  const std::vector<nlohmann::json> kinds = {{{"bot", "random"}}, {{"bot", "noisy_oracle"}, {"skill", 0.5}},
                                             {{"bot", "cooperator"}}, {{"bot", "klevel"}, {"k", 2}}};
  for (const auto& p : kinds) {
    const auto bot = scripted::make_scripted(p);
    for (auto game : kAllGames) {
      auto ctx = context_for(game, 4, 1, Stage::Act);
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ctx.seed = seed;
        const auto a = bot->act(ctx);
        const auto b = bot->act(ctx);
        ASSERT_EQ(a.action, b.action);
        ASSERT_EQ(a.reasoning, b.reasoning);
        ASSERT_TRUE(a.action);
        EXPECT_FALSE(check_action(ctx.view, 1, *a.action)) << p.dump();
        ctx.stage = Stage::Predict;
        EXPECT_EQ(bot->predict(ctx, 2).payload, bot->predict(ctx, 2).payload);
        ctx.stage = Stage::Act;
      }
    }
  }
}

TEST(Scripted, RandomBotPredictionsAreLegalAndVaried) {
  const auto bot = scripted::make_scripted({{"bot", "random"}});
  auto ctx = context_for(GameKind::HUPI, 3, 0, Stage::Predict);
  std::set<int> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ctx.seed = seed;
    const auto p = bot->predict(ctx, 1).payload;
    ASSERT_TRUE(p);
    EXPECT_FALSE(check_prediction(ctx.view, 1, *p));
    seen.insert(std::get<HupiPrediction>(*p).bid);
  }
  EXPECT_GT(seen.size(), 15u);
}

TEST(Scripted, UnknownBotOrBadSkillIsRejected) {
  EXPECT_THROW(scripted::make_scripted({{"bot", "genius"}}), ValidationError);
  EXPECT_THROW(scripted::make_scripted({{"bot", "noisy_oracle"}, {"skill", 1.5}}), ValidationError);
}

// ---- prompts -----------------------------------------------------------------------

TEST(Prompts, SurvivorFramingsUseTheirOwnVocabulary) {
  const auto a = joined(prompts::build_prompt(context_for(GameKind::Survivor, 3, 0, Stage::Act, Framing::A), {}));
  const auto b = joined(prompts::build_prompt(context_for(GameKind::Survivor, 3, 0, Stage::Act, Framing::B), {}));
  EXPECT_NE(a.find("cowboy"), std::string::npos);
  EXPECT_EQ(a.find("pirate"), std::string::npos);
  EXPECT_NE(b.find("pirate"), std::string::npos);
  EXPECT_EQ(b.find("cowboy"), std::string::npos);
}

TEST(Prompts, IdenticalContextsGiveIdenticalBytes) {
  for (auto game : kAllGames)
    for (auto stage : {Stage::Communicate, Stage::Predict, Stage::Act}) {
      const auto ctx = context_for(game, 4, 2, stage, Framing::B);
      prompts::Task task;
      if (stage == Stage::Communicate) task.partner = 0;
      if (stage == Stage::Predict) task.target = 1;
      EXPECT_EQ(prompts::build_prompt(ctx, task), prompts::build_prompt(ctx, task));
    }
}

TEST(Prompts, ActStageCarriesTheActionGrammar) {
  for (auto game : kAllGames) {
    const auto ctx = context_for(game, 3, 0, Stage::Act);
    const auto prompt = prompts::build_prompt(ctx, {});
    ASSERT_GE(prompt.size(), 2u);
    EXPECT_EQ(prompt.front().role, "system");
    EXPECT_NE(joined(prompt).find(grammar::action_grammar(game)), std::string::npos);
    prompts::Task task;
    task.target = 1;
    auto pctx = context_for(game, 3, 0, Stage::Predict);
    EXPECT_NE(joined(prompts::build_prompt(pctx, task)).find(grammar::prediction_grammar(game)), std::string::npos);
  }
}

TEST(Prompts, FramingsShareTheRuleParameters) {
  for (auto game : kAllGames) {
    const auto a = context_for(game, 4, 0, Stage::Act, Framing::A);
    const auto b = context_for(game, 4, 0, Stage::Act, Framing::B);
    EXPECT_NE(prompts::vocabulary(game, Framing::A).setting, prompts::vocabulary(game, Framing::B).setting);
    const auto ra = prompts::rules_text(game, Framing::A, a.view, 0, a.names);
    const auto rb = prompts::rules_text(game, Framing::B, b.view, 0, b.names);
    // Same numbers in the same order: strip everything but digits.
    auto digits = [](const std::string& s) {
      std::string d;
      for (char c : s)
        if (std::isdigit(static_cast<unsigned char>(c))) d += c;
      return d;
    };
    EXPECT_EQ(digits(ra), digits(rb)) << to_string(game);
  }
}

TEST(Prompts, PrivateStateShowsOnlyOwnResources) {
  auto ctx = context_for(GameKind::Survivor, 3, 1, Stage::Act);
  ctx.view.as<SurvivorState>().ammo[1] = 4;
  const auto text = prompts::private_state(ctx);
  EXPECT_NE(text.find("You have 3 lives and 4 "), std::string::npos) << text;
  EXPECT_EQ(text.find("-1"), std::string::npos);
}
