#pragma once

// Helpers shared by the unit and acceptance tests.

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "arena/runner.hpp"

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "arena") {
    static int counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline arena::AgentConfig bot(const std::string& name, const std::string& kind,
                              nlohmann::json extra = nlohmann::json::object()) {
  extra["bot"] = kind;
  return arena::AgentConfig{name, "scripted", extra};
}

inline arena::MatchSpec make_spec(arena::GameKind game, const std::vector<std::string>& keys,
                                  std::uint64_t seed = 1, int max_rounds = 10, bool communication = true,
                                  arena::Framing framing = arena::Framing::A) {
  arena::MatchSpec s;
  s.match_id = "m" + std::to_string(seed);
  s.game = game;
  s.size = static_cast<int>(keys.size());
  s.framing = framing;
  s.communication_enabled = communication;
  s.max_rounds = max_rounds;
  s.seed = seed;
  const auto names = arena::draw_display_names(s.size, seed);
  for (std::size_t i = 0; i < keys.size(); ++i) s.roster.push_back({names[i], keys[i]});
  return s;
}

inline std::vector<arena::AgentPtr> seats_for(const arena::MatchSpec& spec, const arena::AgentRegistry& reg) {
  std::vector<arena::AgentPtr> seats;
  for (const auto& a : spec.roster) seats.push_back(reg.at(a.model_key));
  return seats;
}

// Plays every match of a plan in memory, in plan order.
inline std::vector<arena::MatchRecord> play_plan(const arena::CampaignPlan& plan, const arena::AgentRegistry& reg,
                                                 const arena::ProtocolOptions& opts = {}) {
  std::vector<arena::MatchRecord> out;
  out.reserve(plan.matches.size());
  for (const auto& spec : plan.matches) {
    const auto seats = seats_for(spec, reg);
    out.push_back(arena::run_match(spec, seats, nullptr, opts));
  }
  return out;
}

inline std::vector<arena::MatchRecord> play_config(const arena::ArenaConfig& config, bool ablation = false) {
  const auto plan = arena::enumerate_matches(config, ablation);
  const auto reg = arena::make_registry(config);
  arena::ProtocolOptions opts;
  opts.params = config.rules;
  return play_plan(plan, reg, opts);
}

}  // namespace testsupport
