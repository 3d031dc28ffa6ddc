#pragma once

// Prompt templates. Both framings of a game share every rule-bearing sentence;
// only the story vocabulary differs.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arena/agents.hpp"
#include "arena/llm.hpp"

namespace arena::prompts {

struct Vocabulary {
  std::string setting;   // one-line story
  std::string players;   // plural noun for the players
  std::string resource;  // what is spent, hauled, split, chosen or bid
  std::string verb;      // the cost-imposing act
};

const Vocabulary& vocabulary(GameKind kind, Framing framing);

// Rules for one game under one framing, with parameters filled in.
std::string rules_text(GameKind kind, Framing framing, const games::GameState& view, int seat,
                       std::span<const std::string> names);

// What the player privately knows about its own position.
std::string private_state(const StageContext& ctx);

// Public history digest plus the agent's own conversations, predictions and reasoning.
std::string history_digest(const StageContext& ctx);

struct Task {
  std::optional<int> partner;             // communicate
  std::span<const Message> transcript{};  // communicate
  std::optional<int> target;              // predict
  std::string correction;                 // re-prompt note after a bad answer
};

std::vector<llm::ChatMessage> build_prompt(const StageContext& ctx, const Task& task);

}  // namespace arena::prompts
