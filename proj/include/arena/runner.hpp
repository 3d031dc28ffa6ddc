#pragma once

// Campaign planning and execution.

#include <compare>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arena/agents.hpp"
#include "arena/protocol.hpp"

namespace arena {

struct CampaignPlan {
  std::vector<MatchSpec> matches;
  double coverage_fraction = 1.0;
  int parallelism = 1;
  std::vector<std::string> warnings;
};

// Every (game, size, framing, roster combination, repeat) in config order,
// subsampled by coverage_fraction with the master seed. With `ablation`, each
// kept match also gets a copy with communication disabled (id suffix "-nc").
CampaignPlan enumerate_matches(const ArenaConfig& config, bool ablation = false);

struct CampaignOptions {
  std::filesystem::path trace_dir;
  int parallelism = 1;
  bool resume = false;
  ProtocolOptions protocol;
  std::function<void(const std::string&)> log;  // progress lines; may be empty
};

struct CampaignSummary {
  int planned = 0;
  int completed = 0;
  int aborted = 0;
  int skipped = 0;  // already complete on disk (resume)
  int flagged_turns = 0;
  int flagged_predictions = 0;
  int failed_messages = 0;
  bool campaign_aborted = false;
  std::string abort_reason;
  std::vector<std::string> aborted_ids;
};

nlohmann::json summary_to_json(const CampaignSummary& s);

// Runs the plan with a bounded worker pool. Each match streams to
// <trace_dir>/<id>.jsonl.part and is renamed on completion, so a rerun with
// `resume` skips exactly the matches already finished. A match whose trace
// cannot be written is aborted; if the trace directory itself is unusable the
// campaign stops scheduling new matches. `records`, when given, receives the
// finished records in plan order.
CampaignSummary run_campaign(const CampaignPlan& plan, const AgentRegistry& agents, const CampaignOptions& options,
                             std::vector<MatchRecord>* records = nullptr);

// Events e1, e2 are parallel for focals i, j when their keys are equal.
struct ParallelKey {
  GameKind game = GameKind::HUPI;
  int size = 0;
  std::optional<Framing> framing;  // absent when framing is not matched
  bool communication = true;
  std::vector<std::string> opponents;  // sorted model keys of everyone but the focal

  auto operator<=>(const ParallelKey&) const = default;
  bool operator==(const ParallelKey&) const = default;
};

// Throws ContractViolation when `focal` (a model key) is not seated in `spec`.
ParallelKey parallel_key(const MatchSpec& spec, const std::string& focal, bool match_framing = true);

}  // namespace arena
