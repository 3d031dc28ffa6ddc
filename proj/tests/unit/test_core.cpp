#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "arena/config.hpp"
#include "arena/trace.hpp"
#include "test_support.hpp"

using namespace arena;
using testsupport::TempDir;

TEST(Core, FiveGameKindsRoundTripThroughNames) {
  EXPECT_EQ(std::size(kAllGames), 5u);
  std::set<std::string> names;
  for (GameKind g : kAllGames) {
    names.insert(std::string(to_string(g)));
    EXPECT_EQ(parse_game_kind(to_string(g)), g);
  }
  EXPECT_EQ(names.size(), 5u);
  EXPECT_EQ(parse_framing(to_string(Framing::B)), Framing::B);
  EXPECT_THROW(parse_game_kind("chess"), ArenaError);
}

TEST(Core, MixSeedIsDeterministicAndSpreads) {
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
  EXPECT_NE(mix_seed(1, 2, 3), mix_seed(1, 2, 4));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(mix_seed(42, i));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Core, DisplayNamesAreUniqueSeededAndFromThePool) {
  EXPECT_EQ(name_pool().size(), 64u);
  const std::set<std::string> pool(name_pool().begin(), name_pool().end());
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto names = draw_display_names(5, seed);
    EXPECT_EQ(names, draw_display_names(5, seed));
    EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 5u);
    for (const auto& n : names) EXPECT_TRUE(pool.count(n));
  }
}

TEST(Core, SpecValidationRejectsRosterSizeMismatch) {
  auto spec = testsupport::make_spec(GameKind::HUPI, {"a", "b", "c"});
  EXPECT_NO_THROW(spec.validate());
  spec.size = 4;
  EXPECT_THROW(spec.validate(), ArenaError);
  spec = testsupport::make_spec(GameKind::HUPI, {"a", "b"});
  spec.roster[1].name = spec.roster[0].name;
  EXPECT_THROW(spec.validate(), ArenaError);
}

// ---- configuration ------------------------------------------------------------

TEST(Config, MinimalConfigGetsDefaults) {
  const auto c = parse_config(R"({"agents":[{"name":"g","kind":"scripted","params":{"bot":"greedy"}}]})");
  EXPECT_EQ(c.max_rounds, 10);
  EXPECT_EQ(c.sizes, (std::vector<int>{2, 3, 4, 5}));
  EXPECT_EQ(c.games.size(), 5u);
  EXPECT_EQ(c.framings.size(), 2u);
  EXPECT_TRUE(c.communication);
  EXPECT_DOUBLE_EQ(c.coverage_fraction, 1.0);
  EXPECT_EQ(c.agents.at(0).params.at("bot"), "greedy");
}

TEST(Config, OmittedMaxRoundsSurvivesRoundTripAsTen) {
  const auto c = parse_config(R"({"agents":[{"name":"g"}],"seed":9})");
  const auto again = config_from_json(config_to_json(c));
  EXPECT_EQ(again.max_rounds, 10);
  EXPECT_EQ(again.seed, 9u);
  EXPECT_EQ(config_to_json(again), config_to_json(c));
}

TEST(Config, SizeOutOfRangeNamesTheKey) {
  try {
    parse_config(R"({"agents":[{"name":"g"}],"sizes":[2,7]})");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.key(), "sizes");
    EXPECT_NE(std::string(e.what()).find("size must be in [2,5]"), std::string::npos);
  }
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_THROW(parse_config(R"({"agents":[{"name":"g"}],"colour":"red"})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"agents":[{"name":"g","flavour":1}]})"), ValidationError);
}

TEST(Config, ParseErrorsCarryLineContext) {
  try {
    parse_config("{\n  \"agents\": [\n    {\"name\": \"g\",}\n  ]\n}");
    FAIL() << "expected a parse error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Config, BoundsAreChecked) {
  EXPECT_THROW(parse_config(R"({"agents":[{"name":"g"}],"coverage_fraction":0})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"agents":[{"name":"g"}],"max_rounds":0})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"agents":[]})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"agents":[{"name":"g"},{"name":"g"}]})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"agents":[{"name":"g","kind":"human"}]})"), ValidationError);
}

TEST(Config, LlmBindingParsesWithoutSecrets) {
  const auto c = parse_config(
      R"({"agents":[{"name":"m","kind":"llm","params":{"model":"x"}}],
          "llm":{"base_url":"http://localhost:1/v1","model":"base","api_key_env":"MY_KEY","timeout_s":5,"max_retries":2}})");
  ASSERT_TRUE(c.llm);
  EXPECT_EQ(c.llm->api_key_env, "MY_KEY");
  EXPECT_EQ(c.llm->max_retries, 2);
  EXPECT_THROW(parse_config(R"({"agents":[{"name":"g"}],"llm":{"model":"x","timeout_s":0}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"agents":[{"name":"g"}],"llm":{"model":"x","max_retries":-1}})"), ValidationError);
}

// ---- traces ---------------------------------------------------------------------

namespace {

std::vector<MatchRecord> sample_records() {
  ArenaConfig c;
  c.agents = {testsupport::bot("g", "greedy"), testsupport::bot("c", "cooperator"), testsupport::bot("r", "random"),
              testsupport::bot("o", "noisy_oracle", {{"skill", 0.5}})};
  c.sizes = {2, 3};
  c.max_rounds = 4;
  c.seed = 11;
  c.coverage_fraction = 0.3;
  return testsupport::play_config(c, true);
}

void write_lines(const std::filesystem::path& p, const std::vector<Json>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l.dump() << "\n";
}

}  // namespace

TEST(Trace, EveryRecordRoundTripsThroughLines) {
  const auto records = sample_records();
  ASSERT_GT(records.size(), 20u);
  std::set<std::string> types;
  for (const auto& r : records) {
    const auto lines = record_to_lines(r);
    ASSERT_FALSE(lines.empty());
    EXPECT_EQ(lines.front().at("type"), "match_header");
    EXPECT_EQ(lines.back().at("type"), "match_result");
    for (const auto& l : lines) {
      types.insert(l.at("type").get<std::string>());
      EXPECT_EQ(l.at("match_id"), r.match_id());
      // Each line survives a text round trip on its own.
      EXPECT_EQ(Json::parse(l.dump()), l);
    }
    EXPECT_EQ(record_from_lines(lines), r);
  }
  EXPECT_EQ(types, (std::set<std::string>{"match_header", "conversation_turn", "prediction", "reasoning", "action",
                                          "round_result", "match_result"}));
}

TEST(Trace, FileSinkWritesNewlineTerminatedLinesAndRereads) {
  TempDir dir;
  const auto r = sample_records().front();
  const auto path = dir.path() / trace_file_name(r.match_id());
  {
    JsonlFileSink sink(path);
    for (const auto& l : record_to_lines(r)) sink.append(l);
    sink.flush();
  }
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_FALSE(text.empty());
  EXPECT_EQ(text.back(), '\n');
  EXPECT_TRUE(trace_is_complete(path));
  EXPECT_EQ(read_trace_file(path), r);
}

TEST(Trace, ReadTracesIsolatesCorruptFiles) {
  TempDir dir;
  EXPECT_TRUE(read_traces(dir.path()).completed.empty());
  const auto records = sample_records();
  for (int k = 0; k < 3; ++k) write_lines(dir.path() / trace_file_name(records[k].match_id()), record_to_lines(records[k]));
  {
    auto lines = record_to_lines(records[3]);
    std::ofstream out(dir.path() / "broken.jsonl");
    out << lines[0].dump() << "\n{not json\n";
  }
  const auto set = read_traces(dir.path());
  EXPECT_EQ(set.completed.size(), 3u);
  ASSERT_EQ(set.diagnostics.size(), 1u);
  EXPECT_NE(set.diagnostics[0].find("broken.jsonl"), std::string::npos);
}

TEST(Trace, TruncatedFileIsReportedNotLoaded) {
  TempDir dir;
  auto lines = record_to_lines(sample_records().front());
  lines.pop_back();
  write_lines(dir.path() / "cut.jsonl", lines);
  EXPECT_FALSE(trace_is_complete(dir.path() / "cut.jsonl"));
  const auto set = read_traces(dir.path());
  EXPECT_TRUE(set.completed.empty());
  EXPECT_EQ(set.diagnostics.size(), 1u);
}

TEST(Trace, NewerSchemaVersionIsAnExplicitError) {
  TempDir dir;
  auto lines = record_to_lines(sample_records().front());
  lines[0]["schema_version"] = kSchemaVersion + 1;
  write_lines(dir.path() / "future.jsonl", lines);
  EXPECT_THROW(read_traces(dir.path()), TraceError);
}

TEST(Trace, StageOrderWithinEachRound) {
  const int rank_conv = 0, rank_pred = 1, rank_act = 2, rank_result = 3;
  auto rank = [&](const std::string& t) {
    if (t == "conversation_turn") return rank_conv;
    if (t == "prediction") return rank_pred;
    if (t == "reasoning" || t == "action") return rank_act;
    return rank_result;
  };
  for (const auto& r : sample_records()) {
    int last_round = -1, last_rank = -1;
    for (const auto& l : record_to_lines(r)) {
      if (!l.contains("round") || l.at("type") == "match_header" || l.at("type") == "match_result") continue;
      const int round = l.at("round").get<int>();
      const int k = rank(l.at("type").get<std::string>());
      if (round != last_round) {
        EXPECT_GT(round, last_round);
        last_round = round;
        last_rank = -1;
      }
      EXPECT_GE(k, last_rank) << r.match_id() << " round " << round;
      last_rank = k;
    }
  }
}
