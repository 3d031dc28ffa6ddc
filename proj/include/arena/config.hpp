#pragma once

// Arena configuration: a single JSON document. Unknown keys are rejected.
//
//   {
//     "agents": [{"name": "greedy", "kind": "scripted", "params": {"bot": "greedy"}},
//                {"name": "gpt", "kind": "llm", "params": {"model": "gpt-4o-mini"}}],
//     "games": ["coalition", "scheduler", "tragedy", "survivor", "hupi"],
//     "sizes": [2, 3, 4, 5],
//     "framings": ["A", "B"],
//     "communication": true,
//     "max_rounds": 10,
//     "seed": 1,
//     "coverage_fraction": 1.0,
//     "output_dir": "out",
//     "llm": {"base_url": "...", "model": "...", "api_key_env": "OPENAI_API_KEY",
//             "timeout_s": 60, "max_retries": 3}
//   }
//
// Optional extras: "repeats" (seeded replicates per combination), "parallelism",
// "rules" (game constants), "judge" and "second_judge" (LLM bindings for
// scoring), "parallel_match_framing".

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "arena/core.hpp"
#include "arena/games.hpp"

namespace arena {

struct LlmConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_s = 60;
  int max_retries = 3;
  double temperature = 0.7;
  double backoff_base_s = 1.0;

  friend bool operator==(const LlmConfig&, const LlmConfig&) = default;
};

struct AgentConfig {
  std::string name;
  std::string kind;  // "scripted" | "llm"
  nlohmann::json params = nlohmann::json::object();
};

struct ArenaConfig {
  std::vector<AgentConfig> agents;
  std::vector<GameKind> games{std::begin(kAllGames), std::end(kAllGames)};
  std::vector<int> sizes{2, 3, 4, 5};
  std::vector<Framing> framings{Framing::A, Framing::B};
  bool communication = true;
  int max_rounds = 10;
  std::uint64_t seed = 0;
  double coverage_fraction = 1.0;
  std::string output_dir = "arena_out";
  std::optional<LlmConfig> llm;
  std::optional<LlmConfig> judge;
  std::optional<LlmConfig> second_judge;
  int repeats = 1;
  int parallelism = 1;
  bool parallel_match_framing = true;
  games::GameParams rules;
};

// Throws ConfigError (with line context) on parse failure and ValidationError
// naming the offending key on constraint violations.
ArenaConfig load_config(const std::filesystem::path& path);
ArenaConfig parse_config(std::string_view text);
ArenaConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ArenaConfig& c);

LlmConfig llm_config_from_json(const nlohmann::json& j, const std::string& key);
nlohmann::json llm_config_to_json(const LlmConfig& c);

}  // namespace arena
