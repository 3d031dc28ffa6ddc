#include "arena/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "arena/grammar.hpp"

namespace arena::metrics {
namespace {

constexpr std::string_view kMetricNames[] = {"tom",           "transparency", "influence", "amenability",
                                             "assertiveness", "planning",     "learning"};

const TurnRecord* turn_of(const RoundRecord& r, const std::string& name) {
  for (const auto& t : r.turns)
    if (t.agent == name) return &t;
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

const char* kOutputFormat =
    "Answer with a first line of the form `score: <integer from 0 to 3>` and then a short justification.";

std::string outcome_line(const MatchRecord& record, const RoundRecord& r) {
  std::vector<std::string> names;
  for (const auto& a : record.spec.roster) names.push_back(a.name);
  std::ostringstream os;
  for (const auto& t : r.turns) os << t.agent << " played `" << grammar::render_action(t.action, names) << "`. ";
  return os.str();
}

// Asks once, re-asks once with a format reminder; nullopt when both fail.
std::optional<std::pair<int, std::string>> ask(const JudgeFn& judge, std::vector<llm::ChatMessage> prompt) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      std::string rationale;
      const std::string text = judge(prompt);
      if (auto s = parse_judge_score(text, &rationale)) return std::make_pair(*s, rationale);
      prompt.push_back({"assistant", text});
      prompt.push_back({"user", std::string("That answer could not be read. ") + kOutputFormat});
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Metric m) { return kMetricNames[static_cast<std::size_t>(m)]; }

Metric parse_metric(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kMetricNames); ++i)
    if (kMetricNames[i] == s) return static_cast<Metric>(i);
  throw ValidationError("metric", "unknown metric '" + std::string(s) + "'");
}

TomResult tom_scores(const MatchRecord& record) {
  TomResult out;
  const auto states = replay_states(record);
  for (const auto& r : record.rounds) {
    const auto& state = states[static_cast<std::size_t>(r.index)];
    for (const auto& p : r.predictions) {
      const TurnRecord* target = turn_of(r, p.target);
      if (p.flagged || !target || target->flagged) {
        ++out.excluded;
        continue;
      }
      DyadScore d;
      d.from = record.model_of(p.predictor);
      d.to = record.model_of(p.target);
      d.event = record.match_id();
      d.round = r.index;
      d.metric = Metric::Tom;
      d.value = games::prediction_score(state, p.payload, target->action);
      out.scores.push_back(std::move(d));
    }
  }
  return out;
}

std::vector<RoundValue> assertiveness_scores(const MatchRecord& record) {
  std::vector<RoundValue> out;
  const auto states = replay_states(record);
  for (const auto& r : record.rounds) {
    const auto& state = states[static_cast<std::size_t>(r.index)];
    for (const auto& t : r.turns) {
      if (t.flagged) continue;
      const int seat = record.spec.seat_of_name(t.agent);
      out.push_back({record.model_of(t.agent), r.index, games::assertiveness(state, seat, t.action)});
    }
  }
  return out;
}

// ---- judge --------------------------------------------------------------------

JudgeFn llm_judge(const LlmConfig& binding) {
  return [binding](const std::vector<llm::ChatMessage>& prompt) { return llm::complete(binding, prompt, 0.0); };
}

std::optional<int> parse_judge_score(std::string_view text, std::string* rationale) {
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line = trim(text.substr(start, end - start));
    std::string lower;
    for (char c : line) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    while (!lower.empty() && (lower.front() == '*' || lower.front() == '`')) lower.erase(lower.begin());
    if (lower.rfind("score", 0) == 0) {
      std::size_t i = 5;
      while (i < lower.size() && (lower[i] == ' ' || lower[i] == '*')) ++i;
      if (i < lower.size() && lower[i] == ':') {
        ++i;
        while (i < lower.size() && (lower[i] == ' ' || lower[i] == '*')) ++i;
        std::size_t j = i;
        while (j < lower.size() && std::isdigit(static_cast<unsigned char>(lower[j]))) ++j;
        std::string rest = lower.substr(j);
        while (!rest.empty() && (rest.back() == '*' || rest.back() == '`' || rest.back() == '.' || rest.back() == ' '))
          rest.pop_back();
        if (j == i + 1 && rest.empty() && lower[i] >= '0' && lower[i] <= '3') {
          if (rationale) *rationale = end < text.size() ? trim(text.substr(end + 1)) : std::string();
          return lower[i] - '0';
        }
        return std::nullopt;
      }
    }
    start = end + 1;
  }
  return std::nullopt;
}

std::vector<llm::ChatMessage> influence_prompt(const MatchRecord& record, const RoundRecord& round,
                                               const ConversationRecord& conv, const std::string& subject_name) {
  const std::string& partner = conv.first == subject_name ? conv.second : conv.first;
  const TurnRecord* turn = turn_of(round, subject_name);
  std::vector<std::string> names;
  for (const auto& a : record.spec.roster) names.push_back(a.name);

  std::ostringstream sys;
  sys << "You evaluate players in a multi-player game. Rate how much one private conversation changed what "
         "one player then thought and did.\n"
         "0: the conversation had no visible effect on the player's reasoning or decision.\n"
         "1: the conversation is mentioned but the decision would plainly have been the same.\n"
         "2: the conversation clearly shaped part of the reasoning or the decision.\n"
         "3: the decision follows directly from what was said or agreed in the conversation.\n"
      << kOutputFormat;
  std::ostringstream user;
  user << "Game: " << to_string(record.spec.game) << " with " << record.spec.size << " players, round "
       << round.index << ".\n"
       << "Conversation between " << conv.first << " and " << conv.second << ":\n";
  for (const auto& m : conv.messages) user << "  " << m.speaker << ": " << m.text << "\n";
  user << "\nPrivate reasoning of " << subject_name << " afterwards:\n"
       << (turn ? turn->reasoning : std::string()) << "\n\nDecision of " << subject_name << ": `"
       << (turn ? grammar::render_action(turn->action, names) : std::string("none")) << "`\n\n"
       << "How much did " << partner << " influence " << subject_name << " through this conversation?";
  return {{"system", sys.str()}, {"user", user.str()}};
}

std::vector<llm::ChatMessage> strategic_prompt(const MatchRecord& record, const std::string& subject_name, int round,
                                               Metric metric) {
  std::vector<std::string> names;
  for (const auto& a : record.spec.roster) names.push_back(a.name);
  std::ostringstream sys;
  sys << "You evaluate players in a multi-player game from their private reasoning.\n";
  if (metric == Metric::Planning)
    sys << "Rate the planning shown in the latest round's reasoning.\n"
           "0: no plan, or a plan built on a wrong reading of the rules or the situation.\n"
           "1: a vague intention with little thought about consequences.\n"
           "2: a sound plan for this round that considers how others may respond.\n"
           "3: a correct plan spanning several future rounds, anticipating others' moves.\n";
  else
    sys << "Rate how well the player learns from earlier rounds, judged on the latest round's reasoning.\n"
           "0: no use of past rounds, rigid repetition, or wrong conclusions drawn. Use 0 when there is no "
           "earlier round to learn from.\n"
           "1: past rounds are noted but barely change the approach.\n"
           "2: the approach is adjusted sensibly to what happened before.\n"
           "3: clear, accurate lessons from the history drive an improved strategy.\n";
  sys << "If the reasoning is empty, the score is 0.\n" << kOutputFormat;

  std::ostringstream user;
  user << "Game: " << to_string(record.spec.game) << " with " << record.spec.size << " players. The player is "
       << subject_name << ".\n";
  for (const auto& r : record.rounds) {
    if (r.index > round) break;
    const TurnRecord* t = turn_of(r, subject_name);
    user << "\nRound " << r.index << ":\n";
    if (t) {
      user << "  Reasoning: " << t->reasoning << "\n"
           << "  Decision: `" << grammar::render_action(t->action, names) << "`\n";
    }
    if (r.index < round) user << "  Outcome: " << outcome_line(record, r) << "\n";
  }
  user << "\nScore the " << to_string(metric) << " shown in round " << round << ".";
  return {{"system", sys.str()}, {"user", user.str()}};
}

JudgeResult judge_influence(const MatchRecord& record, const JudgeFn& judge, const std::string& judge_name) {
  JudgeResult out;
  for (const auto& r : record.rounds)
    for (const auto& c : r.conversations) {
      if (c.silent()) {
        ++out.skipped;
        continue;
      }
      for (const std::string* subject : {&c.first, &c.second}) {
        if (!turn_of(r, *subject)) continue;
        const std::string& partner = *subject == c.first ? c.second : c.first;
        auto got = ask(judge, influence_prompt(record, r, c, *subject));
        if (!got) {
          ++out.dropped;
          continue;
        }
        JudgeVerdict v;
        v.judge = judge_name;
        v.event = record.match_id();
        v.round = r.index;
        v.scope = "conversation:" + c.first + "|" + c.second;
        v.subject = record.model_of(*subject);
        v.partner = record.model_of(partner);
        v.metric = Metric::Influence;
        v.score = got->first;
        v.rationale = got->second;
        out.dyads.push_back({v.partner, v.subject, v.event, v.round, Metric::Influence, static_cast<double>(v.score)});
        out.verdicts.push_back(std::move(v));
      }
    }
  return out;
}

JudgeResult judge_strategic(const MatchRecord& record, const JudgeFn& judge, const std::string& judge_name,
                            Metric metric) {
  if (metric != Metric::Planning && metric != Metric::Learning)
    throw ContractViolation("judge_strategic scores planning or learning only");
  JudgeResult out;
  for (const auto& r : record.rounds)
    for (const auto& t : r.turns) {
      JudgeVerdict v;
      v.judge = judge_name;
      v.event = record.match_id();
      v.round = r.index;
      v.scope = "round";
      v.subject = record.model_of(t.agent);
      v.metric = metric;
      if (trim(t.reasoning).empty()) {
        v.score = 0;
        v.rationale = "no reasoning given";
        ++out.skipped;
      } else {
        auto got = ask(judge, strategic_prompt(record, t.agent, r.index, metric));
        if (!got) {
          ++out.dropped;
          continue;
        }
        v.score = got->first;
        v.rationale = got->second;
      }
      out.verdicts.push_back(std::move(v));
    }
  return out;
}

Agreement judge_agreement(std::span<const JudgeVerdict> a, std::span<const JudgeVerdict> b) {
  using Key = std::tuple<std::string, int, std::string, std::string, std::string, int>;
  auto key = [](const JudgeVerdict& v) {
    return Key{v.event, v.round, v.scope, v.subject, v.partner, static_cast<int>(v.metric)};
  };
  std::map<Key, int> second;
  for (const auto& v : b) second[key(v)] = v.score;
  Agreement out;
  double abs_sum = 0.0;
  int exact = 0, within = 0;
  for (const auto& v : a) {
    const auto it = second.find(key(v));
    if (it == second.end()) continue;
    const int d = std::abs(v.score - it->second);
    abs_sum += d;
    exact += d == 0;
    within += d <= 1;
    ++out.n;
  }
  if (out.n == 0) throw ArenaError("judge_agreement: the two verdict sets share no keys");
  out.mad = abs_sum / out.n;
  out.exact_rate = static_cast<double>(exact) / out.n;
  out.within1_rate = static_cast<double>(within) / out.n;
  return out;
}

// ---- aggregation --------------------------------------------------------------

std::vector<MetricVector> aggregate_metrics(std::span<const MatchRecord> records, std::span<const DyadScore> dyads,
                                            std::span<const JudgeVerdict> verdicts) {
  using Key = std::pair<std::string, std::string>;  // (event, agent)
  std::map<Key, MetricVector> vecs;
  std::map<Key, std::array<double, kNumMetrics>> sums;

  for (const auto& r : records) {
    if (r.status != MatchStatus::Completed) continue;
    for (const auto& a : r.spec.roster) {
      MetricVector m;
      m.agent = a.model_key;
      m.event = r.match_id();
      m.game = r.spec.game;
      m.size = r.spec.size;
      m.framing = r.spec.framing;
      m.communication = r.spec.communication_enabled;
      vecs[{m.event, m.agent}] = m;
      sums[{m.event, m.agent}] = {};
    }
    for (const auto& v : assertiveness_scores(r)) {
      const Key k{r.match_id(), v.agent};
      sums[k][static_cast<std::size_t>(Metric::Assertiveness)] += v.value;
      ++vecs[k].counts[static_cast<std::size_t>(Metric::Assertiveness)];
    }
  }
  auto add = [&](const std::string& event, const std::string& agent, Metric m, double value) {
    const Key k{event, agent};
    const auto it = vecs.find(k);
    if (it == vecs.end()) return;
    sums[k][static_cast<std::size_t>(m)] += value;
    ++it->second.counts[static_cast<std::size_t>(m)];
  };
  for (const auto& d : dyads) {
    if (d.metric == Metric::Tom) {
      add(d.event, d.from, Metric::Tom, d.value);
      add(d.event, d.to, Metric::Transparency, d.value);
    } else if (d.metric == Metric::Influence) {
      add(d.event, d.from, Metric::Influence, d.value);
      add(d.event, d.to, Metric::Amenability, d.value);
    }
  }
  for (const auto& v : verdicts)
    if (v.metric == Metric::Planning || v.metric == Metric::Learning) add(v.event, v.subject, v.metric, v.score);

  std::vector<MetricVector> out;
  for (auto& [k, m] : vecs) {
    for (std::size_t i = 0; i < kNumMetrics; ++i)
      if (m.counts[i] > 0) m.values[i] = sums[k][i] / m.counts[i];
    out.push_back(std::move(m));
  }
  return out;
}

nlohmann::json to_json(const DyadScore& d) {
  return {{"from", d.from}, {"to", d.to},         {"event", d.event},
          {"round", d.round}, {"metric", to_string(d.metric)}, {"value", d.value}};
}

DyadScore dyad_from_json(const nlohmann::json& j) {
  return {j.at("from").get<std::string>(), j.at("to").get<std::string>(), j.at("event").get<std::string>(),
          j.at("round").get<int>(),        parse_metric(j.at("metric").get<std::string>()),
          j.at("value").get<double>()};
}

nlohmann::json to_json(const JudgeVerdict& v) {
  return {{"judge", v.judge},     {"event", v.event},   {"round", v.round},
          {"scope", v.scope},     {"subject", v.subject}, {"partner", v.partner},
          {"metric", to_string(v.metric)}, {"score", v.score}, {"rationale", v.rationale}};
}

JudgeVerdict verdict_from_json(const nlohmann::json& j) {
  JudgeVerdict v;
  v.judge = j.at("judge").get<std::string>();
  v.event = j.at("event").get<std::string>();
  v.round = j.at("round").get<int>();
  v.scope = j.at("scope").get<std::string>();
  v.subject = j.at("subject").get<std::string>();
  v.partner = j.value("partner", "");
  v.metric = parse_metric(j.at("metric").get<std::string>());
  v.score = j.at("score").get<int>();
  if (v.score < 0 || v.score > 3) throw ValidationError("score", "judge score out of range");
  v.rationale = j.value("rationale", "");
  return v;
}

nlohmann::json to_json(const MetricVector& m) {
  nlohmann::json j{{"agent", m.agent},
                   {"event", m.event},
                   {"game", to_string(m.game)},
                   {"size", m.size},
                   {"framing", to_string(m.framing)},
                   {"communication", m.communication}};
  for (Metric x : kAllMetrics) {
    const auto i = static_cast<std::size_t>(x);
    j[std::string(to_string(x))] = m.values[i] ? nlohmann::json(*m.values[i]) : nlohmann::json(nullptr);
    j["n_" + std::string(to_string(x))] = m.counts[i];
  }
  return j;
}

MetricVector metric_vector_from_json(const nlohmann::json& j) {
  MetricVector m;
  m.agent = j.at("agent").get<std::string>();
  m.event = j.at("event").get<std::string>();
  m.game = parse_game_kind(j.at("game").get<std::string>());
  m.size = j.at("size").get<int>();
  m.framing = parse_framing(j.at("framing").get<std::string>());
  m.communication = j.at("communication").get<bool>();
  for (Metric x : kAllMetrics) {
    const auto i = static_cast<std::size_t>(x);
    const auto& v = j.at(std::string(to_string(x)));
    if (!v.is_null()) m.values[i] = v.get<double>();
    m.counts[i] = j.value("n_" + std::string(to_string(x)), 0);
  }
  return m;
}

}  // namespace arena::metrics
