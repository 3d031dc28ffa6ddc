#pragma once

// Socio-cognitive metrics per (agent, event). Agents are identified by model
// key, events by match id.

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arena/llm.hpp"
#include "arena/records.hpp"

namespace arena::metrics {

enum class Metric { Tom, Transparency, Influence, Amenability, Assertiveness, Planning, Learning };
inline constexpr int kNumMetrics = 7;
inline constexpr Metric kAllMetrics[] = {Metric::Tom,           Metric::Transparency, Metric::Influence,
                                         Metric::Amenability,   Metric::Assertiveness, Metric::Planning,
                                         Metric::Learning};
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);

struct DyadScore {
  std::string from;
  std::string to;
  std::string event;
  int round = 0;
  Metric metric = Metric::Tom;  // Tom or Influence
  double value = 0.0;
  friend bool operator==(const DyadScore&, const DyadScore&) = default;
};

struct TomResult {
  std::vector<DyadScore> scores;
  int excluded = 0;  // flagged predictions or flagged target actions
};

TomResult tom_scores(const MatchRecord& record);

struct RoundValue {
  std::string agent;
  int round = 0;
  double value = 0.0;
};

// One value per unflagged turn.
std::vector<RoundValue> assertiveness_scores(const MatchRecord& record);

// ---- judge --------------------------------------------------------------------

// A judge maps a prompt to raw text. Throwing counts as an unusable answer.
using JudgeFn = std::function<std::string(const std::vector<llm::ChatMessage>&)>;

// Judge backed by an endpoint binding at temperature 0.
JudgeFn llm_judge(const LlmConfig& binding);

struct JudgeVerdict {
  std::string judge;
  std::string event;
  int round = 0;
  std::string scope;    // "conversation:<first>|<second>" or "round"
  std::string subject;  // judged agent
  std::string partner;  // conversation partner (influence only)
  Metric metric = Metric::Influence;
  int score = 0;
  std::string rationale;
  friend bool operator==(const JudgeVerdict&, const JudgeVerdict&) = default;
};

// Finds a line "score: <int>" with the integer in [0,3]; the text after that
// line is the rationale.
std::optional<int> parse_judge_score(std::string_view text, std::string* rationale = nullptr);

struct JudgeResult {
  std::vector<JudgeVerdict> verdicts;
  std::vector<DyadScore> dyads;  // influence only: from = influencer, to = subject
  int dropped = 0;               // unparseable twice, or the judge failed
  int skipped = 0;               // silent conversations, or no reasoning
};

std::vector<llm::ChatMessage> influence_prompt(const MatchRecord& record, const RoundRecord& round,
                                               const ConversationRecord& conv, const std::string& subject_name);
std::vector<llm::ChatMessage> strategic_prompt(const MatchRecord& record, const std::string& subject_name,
                                               int round, Metric metric);

JudgeResult judge_influence(const MatchRecord& record, const JudgeFn& judge, const std::string& judge_name);
// metric is Planning or Learning. Turns with empty reasoning score 0 without a call.
JudgeResult judge_strategic(const MatchRecord& record, const JudgeFn& judge, const std::string& judge_name,
                            Metric metric);

struct Agreement {
  double mad = 0.0;
  double exact_rate = 0.0;
  double within1_rate = 0.0;
  int n = 0;
};

// Pairs verdicts by (event, round, scope, subject, partner, metric). Throws
// ArenaError when nothing pairs.
Agreement judge_agreement(std::span<const JudgeVerdict> a, std::span<const JudgeVerdict> b);

// ---- aggregation --------------------------------------------------------------

struct MetricVector {
  std::string agent;
  std::string event;
  GameKind game = GameKind::HUPI;
  int size = 0;
  Framing framing = Framing::A;
  bool communication = true;
  std::array<std::optional<double>, kNumMetrics> values{};
  std::array<int, kNumMetrics> counts{};

  std::optional<double> get(Metric m) const { return values[static_cast<std::size_t>(m)]; }
  friend bool operator==(const MetricVector&, const MetricVector&) = default;
};

// One vector per (agent, event) over completed records, sorted by (event, agent).
// `dyads` holds Tom and Influence scores; `verdicts` the Planning and Learning
// ones. Metrics without samples stay absent.
std::vector<MetricVector> aggregate_metrics(std::span<const MatchRecord> records, std::span<const DyadScore> dyads,
                                            std::span<const JudgeVerdict> verdicts);

nlohmann::json to_json(const DyadScore& d);
DyadScore dyad_from_json(const nlohmann::json& j);
nlohmann::json to_json(const JudgeVerdict& v);
JudgeVerdict verdict_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MetricVector& m);
MetricVector metric_vector_from_json(const nlohmann::json& j);

}  // namespace arena::metrics
