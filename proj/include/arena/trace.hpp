#pragma once

// JSONL trace persistence: one file per match, one typed record per line.
//
// Line types, in file order:
//   match_header       first line, carries schema_version and the full spec
//   conversation_turn  one per message
//   prediction         one per (predictor, target)
//   reasoning, action  one each per living player
//   round_result       public outcome of the round
//   match_result       last line, final rewards and status

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "arena/records.hpp"

namespace arena {

using Json = nlohmann::json;

// Serialization of game payloads. Seats are stored as indices.
Json action_to_json(const games::GameAction& action);
games::GameAction action_from_json(const Json& j);
Json prediction_to_json(const games::PredictionPayload& payload);
games::PredictionPayload prediction_from_json(const Json& j);
Json outcome_to_json(const games::RoundOutcome& outcome);
games::RoundOutcome outcome_from_json(const Json& j);
Json params_to_json(const games::GameParams& params);
games::GameParams params_from_json(const Json& j);
Json spec_to_json(const MatchSpec& spec);
MatchSpec spec_from_json(const Json& j);

// Builders for each line type.
namespace trace_line {
Json match_header(const MatchSpec& spec, const games::GameParams& params);
Json conversation_turn(const std::string& match_id, int round, const ConversationRecord& conv,
                       int index);
Json prediction(const std::string& match_id, int round, const PredictionRecord& p);
Json reasoning(const std::string& match_id, int round, const TurnRecord& t);
Json action(const std::string& match_id, int round, const TurnRecord& t);
Json round_result(const std::string& match_id, const games::RoundOutcome& outcome);
Json match_result(const MatchRecord& record);
}  // namespace trace_line

// Wall-clock fields excluded from determinism comparisons.
inline constexpr const char* kTimestampFields[] = {"started_at", "finished_at"};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void append(const Json& line) = 0;
  virtual void flush() {}
};

// Collects lines in memory.
class MemorySink : public TraceSink {
 public:
  void append(const Json& line) override { lines_.push_back(line); }
  const std::vector<Json>& lines() const { return lines_; }

 private:
  std::vector<Json> lines_;
};

// Appends newline-terminated lines to one file. Throws TraceError on I/O failure.
class JsonlFileSink : public TraceSink {
 public:
  explicit JsonlFileSink(const std::filesystem::path& path);
  void append(const Json& line) override;
  void flush() override;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mu_;
};

// Full serialization of a finished record, in canonical line order.
std::vector<Json> record_to_lines(const MatchRecord& record);
// Inverse of record_to_lines. Throws TraceError on malformed input.
MatchRecord record_from_lines(const std::vector<Json>& lines);

MatchRecord read_trace_file(const std::filesystem::path& path);

struct TraceSet {
  std::vector<MatchRecord> completed;
  std::vector<MatchRecord> aborted;
  std::vector<std::string> diagnostics;  // one per skipped file
};

// Reads every *.jsonl file in `dir` (sorted by name). Files with corrupt lines
// are skipped and reported; a schema version newer than this reader throws.
TraceSet read_traces(const std::filesystem::path& dir);

std::string trace_file_name(const std::string& match_id);
// True when the file ends with a match_result line.
bool trace_is_complete(const std::filesystem::path& path);

std::string utc_timestamp();

}  // namespace arena
