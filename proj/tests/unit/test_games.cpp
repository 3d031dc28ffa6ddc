#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "arena/games.hpp"

using namespace arena;
using namespace arena::games;

namespace {

using Actions = std::vector<std::optional<GameAction>>;

std::pair<GameState, RoundOutcome> play(const GameState& s, const Actions& a) { return apply_round(s, a); }

// Random legal action for a living seat.
GameAction random_action(const GameState& s, int seat, std::mt19937_64& rng) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  switch (s.kind) {
    case GameKind::Survivor: {
      SurvivorAction a;
      int ammo = s.as<SurvivorState>().ammo[static_cast<std::size_t>(seat)];
      for (int t = 0; t < s.n && ammo > 0; ++t) {
        if (t == seat || !s.alive[static_cast<std::size_t>(t)] || uni(0, 1) == 0) continue;
        const int k = uni(1, ammo);
        a.attacks.emplace_back(t, k);
        ammo -= k;
      }
      return a;
    }
    case GameKind::TragedyOfCommons:
      return TragedyAction{std::uniform_real_distribution<double>(0.0, 70.0)(rng)};
    case GameKind::Coalition: {
      const auto& cs = s.as<CoalitionState>();
      const int r = uni(0, 2);
      if (r == 0) return CoalitionAction{};
      if (r == 1) {
        for (const auto& p : cs.standing)
          if (std::any_of(p.split.begin(), p.split.end(), [&](const auto& m) { return m.first == seat; }))
            return CoalitionAction{CoalitionAction::Type::Accept, {}, p.id};
        return CoalitionAction{};
      }
      Split split;
      for (int m = 0; m < s.n; ++m)
        if (m == seat || uni(0, 1)) split.emplace_back(m, 0.0);
      const double each = cs.prize / static_cast<double>(split.size());
      for (auto& [m, share] : split) share = each;
      return CoalitionAction{CoalitionAction::Type::Propose, split, -1};
    }
    case GameKind::Scheduler:
      return SchedulerAction{uni(0, s.n - 1)};
    case GameKind::HUPI:
      return HupiAction{uni(1, s.as<HupiState>().max_bid)};
  }
  return default_action(s, seat);
}

Actions random_round(const GameState& s, std::mt19937_64& rng) {
  Actions a(static_cast<std::size_t>(s.n));
  for (int i = 0; i < s.n; ++i)
    if (s.alive[static_cast<std::size_t>(i)]) a[static_cast<std::size_t>(i)] = random_action(s, i, rng);
  return a;
}

}  // namespace

// ---- initial states -------------------------------------------------------------

TEST(Games, SchedulerPreferencesAreCirculant) {
  EXPECT_EQ(scheduler_pref(3, 0, 0), 3);
  EXPECT_EQ(scheduler_pref(3, 0, 1), 2);
  EXPECT_EQ(scheduler_pref(3, 0, 2), 1);
  for (int n = 2; n <= 5; ++n)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) EXPECT_EQ(scheduler_pref(n, i, j), scheduler_pref(n, 0, (j - i + n) % n));
}

TEST(Games, InitialStatesAreSymmetric) {
  const auto sv = new_state(GameKind::Survivor, 4, 10);
  EXPECT_EQ(sv.as<SurvivorState>().lives, (std::vector<int>{3, 3, 3, 3}));
  EXPECT_EQ(sv.as<SurvivorState>().ammo, (std::vector<int>{5, 5, 5, 5}));
  for (int n = 2; n <= 5; ++n) {
    const auto tr = new_state(GameKind::TragedyOfCommons, n, 10);
    EXPECT_DOUBLE_EQ(tr.as<TragedyState>().stock, 100.0);
    EXPECT_EQ(tr.as<TragedyState>().hauls, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    EXPECT_EQ(new_state(GameKind::HUPI, n, 10).as<HupiState>().max_bid, 10 * n);
    EXPECT_DOUBLE_EQ(new_state(GameKind::Coalition, n, 10).as<CoalitionState>().prize, 100.0);
  }
}

TEST(Games, RedactHidesOtherPlayersResources) {
  auto s = new_state(GameKind::Survivor, 3, 10);
  s = play(s, {SurvivorAction{{{1, 2}}}, SurvivorAction{}, SurvivorAction{}}).first;
  const auto v = redact(s, 0);
  EXPECT_EQ(v.as<SurvivorState>().ammo[0], 3);
  EXPECT_EQ(v.as<SurvivorState>().lives[0], 3);
  EXPECT_EQ(v.as<SurvivorState>().ammo[1], -1);
  EXPECT_EQ(v.as<SurvivorState>().lives[1], -1);
  EXPECT_EQ(v.as<SurvivorState>().lives[2], -1);
}

// ---- resolution examples ----------------------------------------------------------

TEST(Games, HupiHighestUniqueScores) {
  auto s = new_state(GameKind::HUPI, 4, 10);
  auto [next, out] = play(s, {HupiAction{3}, HupiAction{5}, HupiAction{5}, HupiAction{2}});
  ASSERT_TRUE(out.winner);
  EXPECT_EQ(*out.winner, 0);
  EXPECT_EQ(next.as<HupiState>().wins, (std::vector<int>{1, 0, 0, 0}));

  auto s2 = new_state(GameKind::HUPI, 2, 10);
  EXPECT_FALSE(play(s2, {HupiAction{4}, HupiAction{4}}).second.winner);
}

TEST(Games, HupiExhaustiveAgreesWithBruteForce) {
  for (int n = 2; n <= 3; ++n) {
    for (int m = 1; m <= 5; ++m) {
      const auto s = new_state(GameKind::HUPI, n, 10);
      std::vector<int> bids(static_cast<std::size_t>(n), 1);
      while (true) {
        std::optional<int> expect;
        int best = 0;
        for (int i = 0; i < n; ++i) {
          const int c = static_cast<int>(std::count(bids.begin(), bids.end(), bids[static_cast<std::size_t>(i)]));
          if (c == 1 && bids[static_cast<std::size_t>(i)] > best) {
            best = bids[static_cast<std::size_t>(i)];
            expect = i;
          }
        }
        EXPECT_EQ(hupi_round_winner(bids), expect);
        Actions a;
        for (int b : bids) a.emplace_back(HupiAction{b});
        const auto [next, out] = play(s, a);
        EXPECT_EQ(out.winner, expect);
        const auto& wins = next.as<HupiState>().wins;
        EXPECT_LE(std::accumulate(wins.begin(), wins.end(), 0), 1);
        int k = 0;
        while (k < n && ++bids[static_cast<std::size_t>(k)] > m) bids[static_cast<std::size_t>(k++)] = 1;
        if (k == n) break;
      }
    }
  }
}

TEST(Games, SurvivorSimultaneousResolution) {
  auto s = new_state(GameKind::Survivor, 2, 10);
  const auto [next, out] = play(s, {SurvivorAction{{{1, 3}}}, SurvivorAction{{{0, 1}}}});
  EXPECT_EQ(out.eliminated, (std::vector<int>{1}));
  EXPECT_FALSE(next.alive[1]);
  EXPECT_EQ(next.as<SurvivorState>().lives[0], 2);
  EXPECT_EQ(next.as<SurvivorState>().ammo[0], 2);
  EXPECT_TRUE(out.game_over);
}

TEST(Games, SurvivorMutualEliminationIsAllowed) {
  auto s = new_state(GameKind::Survivor, 3, 10);
  const auto [next, out] = play(s, {SurvivorAction{{{1, 3}}}, SurvivorAction{{{0, 3}}}, SurvivorAction{}});
  EXPECT_EQ(out.eliminated, (std::vector<int>{0, 1}));
  EXPECT_EQ(next.living_count(), 1);
  const auto r = terminal_rewards(next);
  EXPECT_EQ(r, (std::vector<double>{0, 0, 15}));
}

TEST(Games, SurvivorSoleSurvivorAtRoundFourOfTen) {
  GameState t = new_state(GameKind::Survivor, 3, 10);
  auto& ts = t.as<SurvivorState>();
  t.round = 4;
  t.over = true;
  t.alive = {true, false, false};
  ts.eliminated_round = {std::nullopt, 1, 3};
  EXPECT_EQ(terminal_rewards(t), (std::vector<double>{15, 1, 3}));
  t.alive = {true, true, false};
  ts.eliminated_round = {std::nullopt, std::nullopt, 3};
  t.round = 10;
  t.over = false;
  EXPECT_EQ(terminal_rewards(t), (std::vector<double>{10, 10, 3}));
}

TEST(Games, SurvivorEndsWhenAmmunitionIsGone) {
  GameParams params;
  params.survivor_lives = 20;
  auto s = new_state(GameKind::Survivor, 3, 10, params);
  const auto [next, out] =
      play(s, {SurvivorAction{{{1, 2}, {2, 3}}}, SurvivorAction{{{2, 5}}}, SurvivorAction{{{0, 5}}}});
  EXPECT_TRUE(out.eliminated.empty());
  EXPECT_TRUE(out.game_over);
  EXPECT_EQ(terminal_rewards(next), (std::vector<double>{10, 10, 10}));
}

TEST(Games, TragedyProportionalRationing) {
  auto s = new_state(GameKind::TragedyOfCommons, 2, 10);
  const auto [next, out] = play(s, {TragedyAction{60}, TragedyAction{60}});
  EXPECT_DOUBLE_EQ(out.gains[0], 50.0);
  EXPECT_DOUBLE_EQ(out.gains[1], 50.0);
  EXPECT_DOUBLE_EQ(next.as<TragedyState>().stock, 0.0);
  EXPECT_TRUE(out.game_over);
  EXPECT_TRUE(is_terminal(next));
  EXPECT_EQ(terminal_rewards(next), (std::vector<double>{50, 50}));
}

TEST(Games, TragedyRegrowthIsCapped) {
  auto s = new_state(GameKind::TragedyOfCommons, 2, 10);
  auto [next, out] = play(s, {TragedyAction{10}, TragedyAction{20}});
  EXPECT_DOUBLE_EQ(out.total_hauled, 30.0);
  EXPECT_DOUBLE_EQ(next.as<TragedyState>().stock, 100.0);  // 1.5 * 70 = 105, capped
  auto [n2, o2] = play(next, {TragedyAction{40}, TragedyAction{40}});
  EXPECT_DOUBLE_EQ(n2.as<TragedyState>().stock, 30.0);
}

TEST(Games, TragedyConservationOverRandomSequences) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + trial % 4;
    auto s = new_state(GameKind::TragedyOfCommons, n, 10);
    while (!is_terminal(s)) {
      const double before = s.as<TragedyState>().stock;
      auto [next, out] = play(s, random_round(s, rng));
      const double hauled = std::accumulate(out.gains.begin(), out.gains.end(), 0.0);
      ASSERT_LE(out.total_hauled, before + 1e-9);
      ASSERT_NEAR(hauled, out.total_hauled, 1e-9);
      ASSERT_EQ(next.as<TragedyState>().stock, std::min(100.0, 1.5 * (before - out.total_hauled)));
      ASSERT_GE(next.as<TragedyState>().stock, 0.0);
      s = std::move(next);
    }
  }
}

TEST(Games, CoalitionNeedsStrictMajority) {
  auto s = new_state(GameKind::Coalition, 4, 10);
  const Split pair{{0, 50}, {1, 50}};
  s = play(s, {CoalitionAction{CoalitionAction::Type::Propose, pair, -1}, CoalitionAction{}, CoalitionAction{},
               CoalitionAction{}})
          .first;
  const int id = s.as<CoalitionState>().standing.at(0).id;
  const auto [n1, o1] = play(s, {CoalitionAction{CoalitionAction::Type::Accept, {}, id},
                                 CoalitionAction{CoalitionAction::Type::Accept, {}, id}, CoalitionAction{},
                                 CoalitionAction{}});
  EXPECT_FALSE(o1.formed_proposal);  // 2 of 4 is not a majority

  const Split trio{{0, 40}, {1, 30}, {3, 30}};
  auto t = play(n1, {CoalitionAction{CoalitionAction::Type::Propose, trio, -1}, CoalitionAction{}, CoalitionAction{},
                     CoalitionAction{}})
               .first;
  const int tid = t.as<CoalitionState>().standing.back().id;
  const CoalitionAction acc{CoalitionAction::Type::Accept, {}, tid};
  // The proposer re-proposing the identical split counts as endorsement.
  const auto [n2, o2] =
      play(t, {CoalitionAction{CoalitionAction::Type::Propose, trio, -1}, acc, CoalitionAction{}, acc});
  ASSERT_TRUE(o2.formed_proposal);
  EXPECT_TRUE(o2.game_over);
  EXPECT_NEAR(split_total(n2.as<CoalitionState>().formed->split), 100.0, 1e-9);
  EXPECT_EQ(terminal_rewards(n2), (std::vector<double>{40, 30, 0, 30}));
}

TEST(Games, CoalitionWithoutAgreementPaysNothing) {
  auto s = new_state(GameKind::Coalition, 3, 4);
  for (int r = 0; r < 4; ++r) s = play(s, {CoalitionAction{}, CoalitionAction{}, CoalitionAction{}}).first;
  EXPECT_TRUE(is_terminal(s));
  EXPECT_EQ(terminal_rewards(s), (std::vector<double>{0, 0, 0}));
}

TEST(Games, CoalitionFormedSplitsAreMajoritiesSummingToPrize) {
  std::mt19937_64 rng(3);
  int formed = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const int n = 2 + trial % 4;
    auto s = new_state(GameKind::Coalition, n, 10);
    while (!is_terminal(s)) s = play(s, random_round(s, rng)).first;
    const auto& cs = s.as<CoalitionState>();
    if (!cs.formed) continue;
    ++formed;
    EXPECT_GT(2 * static_cast<int>(cs.formed->split.size()), n);
    EXPECT_NEAR(split_total(cs.formed->split), 100.0, 1e-9);
  }
  EXPECT_GT(formed, 100);
}

TEST(Games, SchedulerAgreementPaysPreferences) {
  auto s = new_state(GameKind::Scheduler, 3, 10);
  const auto [n1, o1] = play(s, {SchedulerAction{0}, SchedulerAction{1}, SchedulerAction{1}});
  EXPECT_FALSE(o1.game_over);
  EXPECT_EQ(n1.as<SchedulerState>().last_choice[0], 0);
  const auto [n2, o2] = play(n1, {SchedulerAction{1}, SchedulerAction{1}, SchedulerAction{1}});
  EXPECT_TRUE(o2.game_over);
  EXPECT_EQ(terminal_rewards(n2), (std::vector<double>{2, 3, 1}));
}

TEST(Games, TerminalRewardsRejectLiveState) {
  EXPECT_THROW(terminal_rewards(new_state(GameKind::HUPI, 2, 10)), ContractViolation);
}

TEST(Games, IllegalActionsAreReplacedAndFlagged) {
  auto s = new_state(GameKind::HUPI, 2, 10);
  const auto [next, out] = play(s, {HupiAction{99}, std::nullopt});
  EXPECT_EQ(out.substituted, (std::vector<int>{0, 1}));
  EXPECT_EQ(std::get<HupiAction>(*out.actions[0]).bid, 1);
  auto sv = new_state(GameKind::Survivor, 2, 10);
  EXPECT_TRUE(check_action(sv, 0, SurvivorAction{{{1, 6}}}));
  EXPECT_TRUE(check_action(sv, 0, SurvivorAction{{{0, 1}}}));
  EXPECT_TRUE(check_action(sv, 0, HupiAction{1}));
}

// ---- assertiveness, prediction, defaults ------------------------------------------

TEST(Games, AssertivenessExamples) {
  auto sv = new_state(GameKind::Survivor, 3, 10);
  EXPECT_DOUBLE_EQ(assertiveness(sv, 0, SurvivorAction{{{1, 2}}}), 0.4);
  auto sc = new_state(GameKind::Scheduler, 4, 10);
  EXPECT_DOUBLE_EQ(assertiveness(sc, 2, SchedulerAction{2}), 1.0);
  auto tr = new_state(GameKind::TragedyOfCommons, 2, 10);
  tr.as<TragedyState>().stock = 80.0;
  EXPECT_DOUBLE_EQ(assertiveness(tr, 0, TragedyAction{20}), 0.25);
  EXPECT_DOUBLE_EQ(assertiveness(tr, 0, TragedyAction{200}), 1.0);
  auto hu = new_state(GameKind::HUPI, 2, 10);
  EXPECT_DOUBLE_EQ(assertiveness(hu, 0, HupiAction{5}), 0.25);
  auto co = new_state(GameKind::Coalition, 3, 10);
  EXPECT_DOUBLE_EQ(assertiveness(co, 0, CoalitionAction{CoalitionAction::Type::Propose, {{0, 60}, {1, 40}}, -1}), 0.6);
  EXPECT_DOUBLE_EQ(assertiveness(co, 0, CoalitionAction{}), 0.0);
}

TEST(Games, PredictionScoreExamples) {
  auto sc = new_state(GameKind::Scheduler, 3, 10);
  EXPECT_DOUBLE_EQ(prediction_score(sc, SchedulerPrediction{2}, SchedulerAction{2}), 1.0);
  EXPECT_DOUBLE_EQ(prediction_score(sc, SchedulerPrediction{1}, SchedulerAction{2}), 0.0);
  auto hu = new_state(GameKind::HUPI, 2, 10);
  EXPECT_NEAR(prediction_score(hu, HupiPrediction{5}, HupiAction{9}), 0.7894736842105263, 1e-12);
  auto sv = new_state(GameKind::Survivor, 3, 10);
  EXPECT_DOUBLE_EQ(prediction_score(sv, SurvivorPrediction{}, SurvivorAction{}), 1.0);
  EXPECT_DOUBLE_EQ(prediction_score(sv, SurvivorPrediction{1}, SurvivorAction{{{1, 1}, {2, 1}}}), 1.0);
  EXPECT_DOUBLE_EQ(prediction_score(sv, SurvivorPrediction{2}, SurvivorAction{{{1, 1}, {2, 2}}}), 1.0);
  EXPECT_DOUBLE_EQ(prediction_score(sv, SurvivorPrediction{}, SurvivorAction{{{1, 1}}}), 0.0);
  auto tr = new_state(GameKind::TragedyOfCommons, 2, 10);
  EXPECT_DOUBLE_EQ(prediction_score(tr, TragedyPrediction{30}, TragedyAction{50}), 0.8);
  auto co = new_state(GameKind::Coalition, 2, 10);
  EXPECT_DOUBLE_EQ(prediction_score(co, CoalitionPrediction{Stance::Pass}, CoalitionAction{}), 1.0);
  EXPECT_THROW(prediction_score(co, HupiPrediction{1}, CoalitionAction{}), ContractViolation);
}

TEST(Games, DefaultActionsAreMinimal) {
  EXPECT_EQ(std::get<SurvivorAction>(default_action(new_state(GameKind::Survivor, 3, 10), 1)), SurvivorAction{});
  EXPECT_EQ(std::get<SchedulerAction>(default_action(new_state(GameKind::Scheduler, 4, 10), 2)).option, 2);
  EXPECT_EQ(std::get<HupiAction>(default_action(new_state(GameKind::HUPI, 4, 10), 0)).bid, 1);
  EXPECT_EQ(std::get<TragedyAction>(default_action(new_state(GameKind::TragedyOfCommons, 4, 10), 0)).extraction, 0.0);
  EXPECT_EQ(std::get<CoalitionAction>(default_action(new_state(GameKind::Coalition, 4, 10), 0)).type,
            CoalitionAction::Type::Pass);
}

TEST(Games, FacetOfActionIsAPerfectPrediction) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto kind = kAllGames[trial % 5];
    const int n = 2 + (trial / 5) % 4;
    auto s = new_state(kind, n, 10);
    for (int r = 0; r < trial % 3 && !is_terminal(s); ++r) s = play(s, random_round(s, rng)).first;
    if (is_terminal(s)) continue;
    for (int i = 0; i < n; ++i) {
      if (!s.alive[static_cast<std::size_t>(i)]) continue;
      const auto a = random_action(s, i, rng);
      EXPECT_DOUBLE_EQ(prediction_score(s, facet_of(s, a), a), 1.0);
    }
  }
}

TEST(Games, ScoresStayInUnitInterval) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 4000; ++trial) {
    const auto kind = kAllGames[trial % 5];
    const int n = 2 + (trial / 5) % 4;
    auto s = new_state(kind, n, 6);
    while (!is_terminal(s)) {
      for (int i = 0; i < n; ++i) {
        if (!s.alive[static_cast<std::size_t>(i)]) continue;
        const auto a = random_action(s, i, rng);
        const double as = assertiveness(s, i, a);
        ASSERT_GE(as, 0.0);
        ASSERT_LE(as, 1.0);
        const auto guess = facet_of(s, random_action(s, i, rng));
        const double ps = prediction_score(s, guess, a);
        ASSERT_GE(ps, 0.0);
        ASSERT_LE(ps, 1.0);
      }
      s = play(s, random_round(s, rng)).first;
    }
  }
}

// ---- determinism and symmetry -------------------------------------------------------

TEST(Games, ApplyRoundIsPure) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    auto s = new_state(kAllGames[trial % 5], 2 + trial % 4, 10);
    const auto a = random_round(s, rng);
    EXPECT_EQ(play(s, a), play(s, a));
  }
}

namespace {

GameAction relabel(const GameAction& a, const std::vector<int>& perm, int shift, int n) {
  return std::visit(
      [&](const auto& x) -> GameAction {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SurvivorAction>) {
          SurvivorAction y;
          for (auto [t, k] : x.attacks) y.attacks.emplace_back(perm[static_cast<std::size_t>(t)], k);
          return y;
        } else if constexpr (std::is_same_v<T, SchedulerAction>) {
          return SchedulerAction{(x.option + shift) % n};
        } else {
          return x;
        }
      },
      a);
}

}  // namespace

TEST(Games, RelabelingPlayersPermutesRewards) {
  std::mt19937_64 rng(17);
  const GameKind kinds[] = {GameKind::Survivor, GameKind::TragedyOfCommons, GameKind::HUPI, GameKind::Scheduler};
  for (int trial = 0; trial < 2000; ++trial) {
    const auto kind = kinds[trial % 4];
    const int n = 2 + (trial / 4) % 4;
    std::vector<int> perm(static_cast<std::size_t>(n));
    int shift = 0;
    if (kind == GameKind::Scheduler) {
      // Circulant preferences are invariant under rotations only.
      shift = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
      for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = (i + shift) % n;
    } else {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
    }
    auto s = new_state(kind, n, 8);
    auto p = new_state(kind, n, 8);
    while (!is_terminal(s)) {
      const auto a = random_round(s, rng);
      Actions b(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        if (a[static_cast<std::size_t>(i)])
          b[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
              relabel(*a[static_cast<std::size_t>(i)], perm, shift, n);
      s = play(s, a).first;
      p = play(p, b).first;
    }
    ASSERT_TRUE(is_terminal(p));
    const auto rs = terminal_rewards(s);
    const auto rp = terminal_rewards(p);
    for (int i = 0; i < n; ++i)
      // Tragedy rationing sums demands in seat order, so allow rounding.
      ASSERT_NEAR(rs[static_cast<std::size_t>(i)], rp[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])], 1e-9);
  }
}
