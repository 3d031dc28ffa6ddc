#pragma once

// The complete trace of one game event.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arena/core.hpp"
#include "arena/games.hpp"

namespace arena {

struct Message {
  std::string speaker;
  std::string text;
  bool truncated = false;
  bool failed = false;
  friend bool operator==(const Message&, const Message&) = default;
};

struct ConversationRecord {
  int round = 0;
  std::string first;   // participant names, lower seat first
  std::string second;
  std::vector<Message> messages;

  bool involves(std::string_view name) const { return first == name || second == name; }
  bool silent() const;  // every message empty
  friend bool operator==(const ConversationRecord&, const ConversationRecord&) = default;
};

struct PredictionRecord {
  std::string predictor;
  std::string target;
  games::PredictionPayload payload;
  bool flagged = false;  // payload is a substituted neutral default
  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct TurnRecord {
  std::string agent;
  std::string reasoning;
  games::GameAction action;
  bool flagged = false;  // action is a substituted default
  std::string flag_reason;
  friend bool operator==(const TurnRecord&, const TurnRecord&) = default;
};

struct RoundRecord {
  int index = 0;
  std::vector<ConversationRecord> conversations;
  std::vector<PredictionRecord> predictions;
  std::vector<TurnRecord> turns;
  games::RoundOutcome outcome;
  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

enum class MatchStatus { Completed, Aborted };

struct MatchRecord {
  MatchSpec spec;
  games::GameParams params;
  std::vector<RoundRecord> rounds;
  std::map<std::string, double> rewards;  // display name -> final score
  MatchStatus status = MatchStatus::Completed;
  int schema_version = kSchemaVersion;
  std::string abort_reason;

  const std::string& match_id() const { return spec.match_id; }
  double reward_of_seat(int seat) const;
  // model_key -> reward
  std::map<std::string, double> rewards_by_model() const;
  const std::string& model_of(std::string_view name) const;

  friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

// Per-round states obtained by replaying the recorded actions from the start.
// states[r] is the state before round r; the last entry is the final state.
std::vector<games::GameState> replay_states(const MatchRecord& record);

}  // namespace arena
