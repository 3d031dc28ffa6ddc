#pragma once

// Client for OpenAI-compatible chat-completion endpoints, and the agent that
// plays through one.

#include <optional>
#include <string>
#include <vector>

#include "arena/agents.hpp"
#include "arena/config.hpp"

namespace arena::llm {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

class LlmError : public ArenaError {
 public:
  LlmError(const std::string& what, bool permanent, int status = 0)
      : ArenaError(what), permanent_(permanent), status_(status) {}
  bool permanent() const { return permanent_; }
  int status() const { return status_; }  // HTTP status, 0 for transport errors

 private:
  bool permanent_;
  int status_;
};

// POSTs to {base_url}/chat/completions and returns choices[0].message.content.
// Transport errors, 5xx and 429 are retried up to max_retries times with
// exponential backoff; any other 4xx fails at once. `temperature` overrides
// the binding's.
std::string complete(const LlmConfig& binding, const std::vector<ChatMessage>& messages,
                     std::optional<double> temperature = std::nullopt);

// Splits "https://host:port/v1" into the scheme-host-port part and the path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url);

class LlmAgent final : public Agent {
 public:
  explicit LlmAgent(LlmConfig binding) : binding_(std::move(binding)) {}
  std::string describe() const override { return "llm(" + binding_.model + ")"; }
  MessageReply converse(const StageContext& ctx, int partner, std::span<const Message> transcript) const override;
  PredictionReply predict(const StageContext& ctx, int target) const override;
  ActionBlock act(const StageContext& ctx) const override;
  const LlmConfig& binding() const { return binding_; }

 private:
  LlmConfig binding_;
};

}  // namespace arena::llm
