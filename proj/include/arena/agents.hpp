#pragma once

// The agent interface and the contexts agents are given at each stage.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arena/config.hpp"
#include "arena/games.hpp"
#include "arena/records.hpp"

namespace arena {

enum class Stage { Communicate, Predict, Act };
std::string_view to_string(Stage stage);

// What one agent may see at one stage. Built by the protocol; never holds
// another player's reasoning, hidden resources, or conversations it was not in.
struct StageContext {
  std::string match_id;
  GameKind game = GameKind::HUPI;
  Framing framing = Framing::A;
  int seat = 0;
  int round = 0;
  Stage stage = Stage::Communicate;
  std::vector<std::string> names;  // display names by seat
  games::GameState view;           // redacted for `seat`
  std::vector<games::RoundOutcome> history;
  std::vector<ConversationRecord> conversations;  // own only
  std::vector<PredictionRecord> own_predictions;
  std::vector<std::string> own_reasoning;  // one entry per finished round
  int message_cap = 500;
  int messages_per_agent = 2;
  std::uint64_t seed = 0;  // agent-side randomness for this (match, seat, round, stage)

  const std::string& self_name() const { return names.at(static_cast<std::size_t>(seat)); }
  std::vector<int> living_opponents() const;
  int seat_of(std::string_view name) const;
};

struct MessageReply {
  std::string text;
  bool failed = false;
};

struct PredictionReply {
  std::optional<games::PredictionPayload> payload;  // nullopt = malformed or failed
  bool failed = false;
  std::string raw;
};

// Reasoning text plus the parsed action (nullopt when parsing or the endpoint failed).
struct ActionBlock {
  std::string reasoning;
  std::optional<games::GameAction> action;
  bool failed = false;
  std::string error;
};

// Agents hold no memory between calls: everything they know arrives in the
// context. Implementations must be safe to call concurrently.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string describe() const = 0;
  virtual MessageReply converse(const StageContext& ctx, int partner,
                                std::span<const Message> transcript) const = 0;
  virtual PredictionReply predict(const StageContext& ctx, int target) const = 0;
  virtual ActionBlock act(const StageContext& ctx) const = 0;
};

using AgentPtr = std::shared_ptr<const Agent>;
using AgentRegistry = std::map<std::string, AgentPtr>;  // keyed by model_key

// Builds the agent for one configuration entry. Throws ValidationError for
// unknown bots or bad parameters.
AgentPtr make_agent(const AgentConfig& config, const std::optional<LlmConfig>& llm);
AgentRegistry make_registry(const ArenaConfig& config);

}  // namespace arena
