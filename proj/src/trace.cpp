#include "arena/trace.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>
#include <sstream>

namespace arena {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Json split_to_json(const games::Split& split) {
  Json arr = Json::array();
  for (const auto& [m, share] : split) arr.push_back(Json::array({m, share}));
  return arr;
}

games::Split split_from_json(const Json& j) {
  games::Split split;
  for (const auto& e : j) split.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
  return split;
}

template <class T>
Json optional_to_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> optional_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

}  // namespace

Json action_to_json(const games::GameAction& action) {
  Json j;
  j["kind"] = std::string(to_string(games::kind_of(action)));
  std::visit(Overloaded{
                 [&](const games::SurvivorAction& a) {
                   Json attacks = Json::array();
                   for (const auto& [t, n] : a.attacks) attacks.push_back(Json::array({t, n}));
                   j["attacks"] = attacks;
                 },
                 [&](const games::TragedyAction& a) { j["extraction"] = a.extraction; },
                 [&](const games::CoalitionAction& a) {
                   switch (a.type) {
                     case games::CoalitionAction::Type::Propose:
                       j["type"] = "propose";
                       j["split"] = split_to_json(a.split);
                       break;
                     case games::CoalitionAction::Type::Accept:
                       j["type"] = "accept";
                       j["proposal"] = a.proposal_id;
                       break;
                     case games::CoalitionAction::Type::Pass:
                       j["type"] = "pass";
                       break;
                   }
                 },
                 [&](const games::SchedulerAction& a) { j["option"] = a.option; },
                 [&](const games::HupiAction& a) { j["bid"] = a.bid; }},
             action);
  return j;
}

games::GameAction action_from_json(const Json& j) {
  switch (parse_game_kind(j.at("kind").get<std::string>())) {
    case GameKind::Survivor: {
      games::SurvivorAction a;
      for (const auto& e : j.at("attacks")) a.attacks.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      return a;
    }
    case GameKind::TragedyOfCommons: return games::TragedyAction{j.at("extraction").get<double>()};
    case GameKind::Coalition: {
      games::CoalitionAction a;
      const auto type = j.at("type").get<std::string>();
      if (type == "propose") {
        a.type = games::CoalitionAction::Type::Propose;
        a.split = split_from_json(j.at("split"));
      } else if (type == "accept") {
        a.type = games::CoalitionAction::Type::Accept;
        a.proposal_id = j.at("proposal").get<int>();
      } else if (type != "pass") {
        throw TraceError("unknown coalition action type '" + type + "'");
      }
      return a;
    }
    case GameKind::Scheduler: return games::SchedulerAction{j.at("option").get<int>()};
    case GameKind::HUPI: return games::HupiAction{j.at("bid").get<int>()};
  }
  throw TraceError("unreachable action kind");
}

Json prediction_to_json(const games::PredictionPayload& payload) {
  Json j;
  j["kind"] = std::string(to_string(games::kind_of(payload)));
  std::visit(Overloaded{
                 [&](const games::SurvivorPrediction& p) { j["target"] = optional_to_json(p.target); },
                 [&](const games::TragedyPrediction& p) { j["extraction"] = p.extraction; },
                 [&](const games::CoalitionPrediction& p) { j["stance"] = std::string(to_string(p.stance)); },
                 [&](const games::SchedulerPrediction& p) { j["option"] = p.option; },
                 [&](const games::HupiPrediction& p) { j["bid"] = p.bid; }},
             payload);
  return j;
}

games::PredictionPayload prediction_from_json(const Json& j) {
  switch (parse_game_kind(j.at("kind").get<std::string>())) {
    case GameKind::Survivor: return games::SurvivorPrediction{optional_from_json<int>(j.at("target"))};
    case GameKind::TragedyOfCommons: return games::TragedyPrediction{j.at("extraction").get<double>()};
    case GameKind::Coalition: {
      auto stance = games::parse_stance(j.at("stance").get<std::string>());
      if (!stance) throw TraceError("unknown stance");
      return games::CoalitionPrediction{*stance};
    }
    case GameKind::Scheduler: return games::SchedulerPrediction{j.at("option").get<int>()};
    case GameKind::HUPI: return games::HupiPrediction{j.at("bid").get<int>()};
  }
  throw TraceError("unreachable prediction kind");
}

Json outcome_to_json(const games::RoundOutcome& o) {
  Json actions = Json::array();
  for (const auto& a : o.actions) actions.push_back(a ? action_to_json(*a) : Json(nullptr));
  return Json{{"round", o.round},
              {"actions", actions},
              {"substituted", o.substituted},
              {"eliminated", o.eliminated},
              {"gains", o.gains},
              {"winner", optional_to_json(o.winner)},
              {"formed_proposal", optional_to_json(o.formed_proposal)},
              {"agreed_option", optional_to_json(o.agreed_option)},
              {"total_hauled", o.total_hauled},
              {"stock_after", o.stock_after},
              {"game_over", o.game_over}};
}

games::RoundOutcome outcome_from_json(const Json& j) {
  games::RoundOutcome o;
  o.round = j.at("round").get<int>();
  for (const auto& a : j.at("actions"))
    o.actions.push_back(a.is_null() ? std::nullopt : std::optional(action_from_json(a)));
  o.substituted = j.at("substituted").get<std::vector<int>>();
  o.eliminated = j.at("eliminated").get<std::vector<int>>();
  o.gains = j.at("gains").get<std::vector<double>>();
  o.winner = optional_from_json<int>(j.at("winner"));
  o.formed_proposal = optional_from_json<int>(j.at("formed_proposal"));
  o.agreed_option = optional_from_json<int>(j.at("agreed_option"));
  o.total_hauled = j.at("total_hauled").get<double>();
  o.stock_after = j.at("stock_after").get<double>();
  o.game_over = j.at("game_over").get<bool>();
  return o;
}

Json params_to_json(const games::GameParams& p) {
  return Json{{"survivor_lives", p.survivor_lives},
              {"survivor_ammo", p.survivor_ammo},
              {"survivor_winner_bonus", p.survivor_winner_bonus},
              {"tragedy_stock", p.tragedy_stock},
              {"tragedy_regrowth", p.tragedy_regrowth},
              {"tragedy_stock_cap", p.tragedy_stock_cap},
              {"coalition_prize", p.coalition_prize},
              {"hupi_range_per_player", p.hupi_range_per_player}};
}

games::GameParams params_from_json(const Json& j) {
  games::GameParams p;
  p.survivor_lives = j.at("survivor_lives").get<int>();
  p.survivor_ammo = j.at("survivor_ammo").get<int>();
  p.survivor_winner_bonus = j.at("survivor_winner_bonus").get<int>();
  p.tragedy_stock = j.at("tragedy_stock").get<double>();
  p.tragedy_regrowth = j.at("tragedy_regrowth").get<double>();
  p.tragedy_stock_cap = j.at("tragedy_stock_cap").get<double>();
  p.coalition_prize = j.at("coalition_prize").get<double>();
  p.hupi_range_per_player = j.at("hupi_range_per_player").get<int>();
  return p;
}

Json spec_to_json(const MatchSpec& s) {
  Json roster = Json::array();
  for (const auto& a : s.roster) roster.push_back(Json{{"name", a.name}, {"model_key", a.model_key}});
  return Json{{"match_id", s.match_id},
              {"game", std::string(to_string(s.game))},
              {"size", s.size},
              {"framing", std::string(to_string(s.framing))},
              {"roster", roster},
              {"communication_enabled", s.communication_enabled},
              {"max_rounds", s.max_rounds},
              {"seed", s.seed}};
}

MatchSpec spec_from_json(const Json& j) {
  MatchSpec s;
  s.match_id = j.at("match_id").get<std::string>();
  s.game = parse_game_kind(j.at("game").get<std::string>());
  s.size = j.at("size").get<int>();
  s.framing = parse_framing(j.at("framing").get<std::string>());
  for (const auto& a : j.at("roster"))
    s.roster.push_back(AgentId{a.at("name").get<std::string>(), a.at("model_key").get<std::string>()});
  s.communication_enabled = j.at("communication_enabled").get<bool>();
  s.max_rounds = j.at("max_rounds").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

namespace trace_line {

Json match_header(const MatchSpec& spec, const games::GameParams& params) {
  Json j = spec_to_json(spec);
  j["type"] = "match_header";
  j["schema_version"] = kSchemaVersion;
  j["params"] = params_to_json(params);
  j["started_at"] = utc_timestamp();
  return j;
}

Json conversation_turn(const std::string& match_id, int round, const ConversationRecord& conv,
                       int index) {
  const Message& m = conv.messages.at(static_cast<std::size_t>(index));
  return Json{{"type", "conversation_turn"}, {"match_id", match_id},   {"round", round},
              {"pair", {conv.first, conv.second}}, {"index", index},  {"speaker", m.speaker},
              {"text", m.text},                    {"truncated", m.truncated}, {"failed", m.failed}};
}

Json prediction(const std::string& match_id, int round, const PredictionRecord& p) {
  return Json{{"type", "prediction"},       {"match_id", match_id},
              {"round", round},             {"predictor", p.predictor},
              {"target", p.target},         {"payload", prediction_to_json(p.payload)},
              {"flagged", p.flagged}};
}

Json reasoning(const std::string& match_id, int round, const TurnRecord& t) {
  return Json{{"type", "reasoning"}, {"match_id", match_id}, {"round", round},
              {"agent", t.agent},    {"text", t.reasoning}};
}

Json action(const std::string& match_id, int round, const TurnRecord& t) {
  return Json{{"type", "action"},     {"match_id", match_id},
              {"round", round},       {"agent", t.agent},
              {"action", action_to_json(t.action)}, {"flagged", t.flagged},
              {"flag_reason", t.flag_reason}};
}

Json round_result(const std::string& match_id, const games::RoundOutcome& outcome) {
  return Json{{"type", "round_result"}, {"match_id", match_id}, {"round", outcome.round},
              {"outcome", outcome_to_json(outcome)}};
}

Json match_result(const MatchRecord& r) {
  return Json{{"type", "match_result"},
              {"match_id", r.match_id()},
              {"status", r.status == MatchStatus::Completed ? "completed" : "aborted"},
              {"rewards", r.rewards},
              {"rounds", r.rounds.size()},
              {"abort_reason", r.abort_reason},
              {"finished_at", utc_timestamp()}};
}

}  // namespace trace_line

JsonlFileSink::JsonlFileSink(const std::filesystem::path& path) : path_(path) {
  out_.open(path, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!out_) throw TraceError("cannot open trace file " + path.string());
}

void JsonlFileSink::append(const Json& line) {
  std::lock_guard lock(mu_);
  out_ << line.dump() << '\n';
  if (!out_) throw TraceError("write failed on " + path_.string());
}

void JsonlFileSink::flush() {
  std::lock_guard lock(mu_);
  out_.flush();
  if (!out_) throw TraceError("flush failed on " + path_.string());
}

std::vector<Json> record_to_lines(const MatchRecord& r) {
  std::vector<Json> lines;
  lines.push_back(trace_line::match_header(r.spec, r.params));
  for (const auto& round : r.rounds) {
    for (const auto& c : round.conversations)
      for (std::size_t i = 0; i < c.messages.size(); ++i)
        lines.push_back(trace_line::conversation_turn(r.match_id(), round.index, c, static_cast<int>(i)));
    for (const auto& p : round.predictions)
      lines.push_back(trace_line::prediction(r.match_id(), round.index, p));
    for (const auto& t : round.turns) lines.push_back(trace_line::reasoning(r.match_id(), round.index, t));
    for (const auto& t : round.turns) lines.push_back(trace_line::action(r.match_id(), round.index, t));
    lines.push_back(trace_line::round_result(r.match_id(), round.outcome));
  }
  lines.push_back(trace_line::match_result(r));
  return lines;
}

MatchRecord record_from_lines(const std::vector<Json>& lines) {
  if (lines.empty()) throw TraceError("empty trace");
  const Json& head = lines.front();
  if (head.value("type", "") != "match_header") throw TraceError("first line is not a match_header");
  const int version = head.at("schema_version").get<int>();
  if (version > kSchemaVersion)
    throw TraceError("trace schema_version " + std::to_string(version) +
                     " is newer than supported version " + std::to_string(kSchemaVersion));

  MatchRecord r;
  r.schema_version = version;
  r.spec = spec_from_json(head);
  r.params = params_from_json(head.at("params"));
  bool finished = false;

  auto round_at = [&](int index) -> RoundRecord& {
    if (index < 0) throw TraceError("negative round index");
    if (r.rounds.empty() || r.rounds.back().index != index) {
      if (!r.rounds.empty() && index < r.rounds.back().index) throw TraceError("round lines out of order");
      RoundRecord rr;
      rr.index = index;
      r.rounds.push_back(std::move(rr));
    }
    return r.rounds.back();
  };
  std::map<std::string, std::string> pending_reasoning;

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const Json& j = lines[li];
    if (finished) throw TraceError("lines after match_result");
    if (j.at("match_id").get<std::string>() != r.match_id()) throw TraceError("mixed match ids in one file");
    const std::string type = j.at("type").get<std::string>();
    if (type == "conversation_turn") {
      auto& round = round_at(j.at("round").get<int>());
      const auto pair = j.at("pair");
      const std::string a = pair.at(0).get<std::string>(), b = pair.at(1).get<std::string>();
      if (j.at("index").get<int>() == 0 || round.conversations.empty() ||
          round.conversations.back().first != a || round.conversations.back().second != b) {
        ConversationRecord c;
        c.round = round.index;
        c.first = a;
        c.second = b;
        round.conversations.push_back(std::move(c));
      }
      round.conversations.back().messages.push_back(
          Message{j.at("speaker").get<std::string>(), j.at("text").get<std::string>(),
                  j.at("truncated").get<bool>(), j.at("failed").get<bool>()});
    } else if (type == "prediction") {
      auto& round = round_at(j.at("round").get<int>());
      round.predictions.push_back(PredictionRecord{j.at("predictor").get<std::string>(),
                                                   j.at("target").get<std::string>(),
                                                   prediction_from_json(j.at("payload")),
                                                   j.at("flagged").get<bool>()});
    } else if (type == "reasoning") {
      round_at(j.at("round").get<int>());
      pending_reasoning[j.at("agent").get<std::string>()] = j.at("text").get<std::string>();
    } else if (type == "action") {
      auto& round = round_at(j.at("round").get<int>());
      const std::string agent = j.at("agent").get<std::string>();
      TurnRecord t;
      t.agent = agent;
      auto it = pending_reasoning.find(agent);
      if (it == pending_reasoning.end()) throw TraceError("action without reasoning for " + agent);
      t.reasoning = it->second;
      pending_reasoning.erase(it);
      t.action = action_from_json(j.at("action"));
      t.flagged = j.at("flagged").get<bool>();
      t.flag_reason = j.value("flag_reason", "");
      round.turns.push_back(std::move(t));
    } else if (type == "round_result") {
      auto& round = round_at(j.at("round").get<int>());
      round.outcome = outcome_from_json(j.at("outcome"));
    } else if (type == "match_result") {
      const std::string status = j.at("status").get<std::string>();
      r.status = status == "completed" ? MatchStatus::Completed : MatchStatus::Aborted;
      r.rewards = j.at("rewards").get<std::map<std::string, double>>();
      r.abort_reason = j.value("abort_reason", "");
      // Partial rounds can only exist in aborted matches.
      if (j.at("rounds").get<std::size_t>() != r.rounds.size() && r.status == MatchStatus::Completed)
        throw TraceError("round count mismatch");
      finished = true;
    } else {
      throw TraceError("unknown line type '" + type + "'");
    }
  }
  if (!finished) throw TraceError("trace has no match_result line");
  if (r.status == MatchStatus::Completed && r.rewards.size() != r.spec.roster.size())
    throw TraceError("rewards must have one entry per roster member");
  return r;
}

MatchRecord read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError("cannot open " + path.string());
  std::vector<Json> lines;
  std::string text;
  std::size_t lineno = 0;
  while (std::getline(in, text)) {
    ++lineno;
    if (text.empty()) continue;
    try {
      lines.push_back(Json::parse(text));
    } catch (const Json::parse_error& e) {
      throw TraceError(path.filename().string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  try {
    return record_from_lines(lines);
  } catch (const Json::exception& e) {
    throw TraceError(path.filename().string() + ": " + e.what());
  }
}

TraceSet read_traces(const std::filesystem::path& dir) {
  TraceSet set;
  if (!std::filesystem::exists(dir)) return set;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      MatchRecord r = read_trace_file(f);
      (r.status == MatchStatus::Completed ? set.completed : set.aborted).push_back(std::move(r));
    } catch (const TraceError& e) {
      const std::string what = e.what();
      if (what.find("newer than supported") != std::string::npos) throw;
      set.diagnostics.push_back(f.filename().string() + ": " + what);
    } catch (const ArenaError& e) {
      set.diagnostics.push_back(f.filename().string() + ": " + e.what());
    }
  }
  return set;
}

std::string trace_file_name(const std::string& match_id) { return match_id + ".jsonl"; }

bool trace_is_complete(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  if (last.empty()) return false;
  try {
    return Json::parse(last).value("type", "") == "match_result";
  } catch (const Json::exception&) {
    return false;
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace arena
