#pragma once

// The round loop: communicate, predict, act.

#include <span>
#include <vector>

#include "arena/agents.hpp"
#include "arena/trace.hpp"

namespace arena {

struct ProtocolOptions {
  int messages_per_agent = 2;
  int message_cap = 500;  // bytes, cut back to a UTF-8 boundary
  games::GameParams params;
  // Order in which actions are collected; empty means roster order. Results
  // must not depend on it.
  std::vector<int> collection_order;
};

// Cuts `text` to at most `cap` bytes without splitting a UTF-8 sequence.
std::string truncate_utf8(std::string text, std::size_t cap, bool* truncated = nullptr);

// Plays one match. `seats[i]` plays roster position i. Every trace line goes to
// `sink` (if given) as soon as its round resolves. Agent failures are absorbed
// as flagged defaults; anything else escaping the loop (a sink failure, say)
// yields a record with status aborted.
MatchRecord run_match(const MatchSpec& spec, std::span<const AgentPtr> seats, TraceSink* sink,
                      const ProtocolOptions& options = {});

}  // namespace arena
