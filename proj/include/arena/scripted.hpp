#pragma once

// Scripted baseline agents. They are deterministic functions of the context
// and its seed, which makes them usable as calibration fixtures: the
// NoisyOracleBot skill parameter gives a known ground-truth ordering.

#include <random>
#include <string>
#include <vector>

#include "arena/agents.hpp"

namespace arena::scripted {

// Messages from scripted bots may carry a machine-readable intent tag that
// other scripted bots read: "... #intent bid=7".
inline constexpr std::string_view kIntentTag = "#intent ";

std::optional<games::PredictionPayload> announced_intent(const StageContext& ctx, int target);

// Best available guess of a target's next action: an intent announced this
// round, else a repeat of its last action, else the neutral default.
games::PredictionPayload informed_prediction(const StageContext& ctx, int target);

// Uniform legal choices.
games::GameAction random_action(const games::GameState& view, int seat, std::mt19937_64& rng);
games::PredictionPayload random_prediction(const games::GameState& view, int target, std::mt19937_64& rng);

// Heuristic best response to point predictions of every living opponent
// (`predicted` is indexed by seat; entries for the actor and the dead are ignored).
games::GameAction best_response(const StageContext& ctx,
                                const std::vector<std::optional<games::PredictionPayload>>& predicted,
                                std::mt19937_64& rng);

// HUPI: probability that `bid` wins when each of `opponents` bidders draws
// independently from `dist` (dist[v-1] = P(bid v)).
double hupi_win_probability(int bid, int opponents, const std::vector<double>& dist);
// Level-k bid: level 0 bids uniformly, level k best-responds to n-1 level k-1
// opponents. Ties in win probability go to the higher bid.
int klevel_bid(int k, int n, int max_bid);

class SilentBot final : public Agent {
 public:
  std::string describe() const override { return "silent"; }
  MessageReply converse(const StageContext&, int, std::span<const Message>) const override;
  PredictionReply predict(const StageContext& ctx, int target) const override;
  ActionBlock act(const StageContext& ctx) const override;
};

class RandomBot final : public Agent {
 public:
  std::string describe() const override { return "random"; }
  MessageReply converse(const StageContext& ctx, int partner, std::span<const Message>) const override;
  PredictionReply predict(const StageContext& ctx, int target) const override;
  ActionBlock act(const StageContext& ctx) const override;
};

class GreedyBot final : public Agent {
 public:
  std::string describe() const override { return "greedy"; }
  MessageReply converse(const StageContext& ctx, int partner, std::span<const Message>) const override;
  PredictionReply predict(const StageContext& ctx, int target) const override;
  ActionBlock act(const StageContext& ctx) const override;
  static games::GameAction greedy_action(const StageContext& ctx);
};

// Plays sustainably and honors what others announce: it believes announced
// intents and yields to them.
class CooperatorBot final : public Agent {
 public:
  std::string describe() const override { return "cooperator"; }
  MessageReply converse(const StageContext& ctx, int partner, std::span<const Message>) const override;
  PredictionReply predict(const StageContext& ctx, int target) const override;
  ActionBlock act(const StageContext& ctx) const override;
  static games::GameAction cooperative_action(const StageContext& ctx);
};

// Predicts that everyone repeats their last action, and plays tit-for-tat.
class MirrorBot final : public Agent {
 public:
  std::string describe() const override { return "mirror"; }
  MessageReply converse(const StageContext& ctx, int partner, std::span<const Message>) const override;
  PredictionReply predict(const StageContext& ctx, int target) const override;
  ActionBlock act(const StageContext& ctx) const override;
};

class KLevelBot final : public Agent {
 public:
  explicit KLevelBot(int k) : k_(k) {}
  std::string describe() const override { return "klevel(" + std::to_string(k_) + ")"; }
  MessageReply converse(const StageContext& ctx, int partner, std::span<const Message>) const override;
  PredictionReply predict(const StageContext& ctx, int target) const override;
  ActionBlock act(const StageContext& ctx) const override;
  int k() const { return k_; }

 private:
  int k_;
};

// With probability `skill` predicts and acts like an informed best responder,
// otherwise like RandomBot.
class NoisyOracleBot final : public Agent {
 public:
  explicit NoisyOracleBot(double skill);
  std::string describe() const override;
  MessageReply converse(const StageContext& ctx, int partner, std::span<const Message>) const override;
  PredictionReply predict(const StageContext& ctx, int target) const override;
  ActionBlock act(const StageContext& ctx) const override;
  double skill() const { return skill_; }

 private:
  double skill_;
};

// Builds a scripted bot from {"bot": "...", "skill": s, "k": k}.
AgentPtr make_scripted(const nlohmann::json& params);

}  // namespace arena::scripted
