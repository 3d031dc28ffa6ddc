#include "arena/grammar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace arena::grammar {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> lines_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    auto line = trim(s.substr(start, end - start));
    if (!line.empty()) out.push_back(line);
    start = end + 1;
  }
  return out;
}

// Content of the first ```tag block; the whole text when there is no fence at all.
std::optional<std::string_view> block_body(std::string_view text, std::string_view tag) {
  const std::string open = "```" + std::string(tag);
  auto pos = text.find(open);
  if (pos == std::string_view::npos) {
    if (text.find("```") == std::string_view::npos) return text;
    return std::nullopt;
  }
  auto body_start = text.find('\n', pos);
  if (body_start == std::string_view::npos) return std::nullopt;
  ++body_start;
  auto close = text.find("```", body_start);
  if (close == std::string_view::npos) return std::nullopt;
  return text.substr(body_start, close - body_start);
}

bool split_kv(std::string_view line, std::string_view& key, std::string_view& value) {
  auto eq = line.find('=');
  if (eq == std::string_view::npos) return false;
  key = trim(line.substr(0, eq));
  value = trim(line.substr(eq + 1));
  return true;
}

std::optional<int> to_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> seat_named(std::span<const std::string> names, std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

const std::string& name_at(std::span<const std::string> names, int seat) {
  return names[static_cast<std::size_t>(seat)];
}

template <class T>
std::optional<T> fail(std::string* error, std::string msg) {
  if (error) *error = std::move(msg);
  return std::nullopt;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string render_action(const games::GameAction& action, std::span<const std::string> names) {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const games::SurvivorAction& a) {
                   if (a.attacks.empty()) out << "hold\n";
                   for (const auto& [t, n] : a.attacks) out << "attack " << name_at(names, t) << "=" << n << "\n";
                 },
                 [&](const games::TragedyAction& a) { out << "extract=" << format_number(a.extraction) << "\n"; },
                 [&](const games::CoalitionAction& a) {
                   switch (a.type) {
                     case games::CoalitionAction::Type::Pass: out << "pass\n"; break;
                     case games::CoalitionAction::Type::Accept: out << "accept=" << a.proposal_id << "\n"; break;
                     case games::CoalitionAction::Type::Propose:
                       out << "propose\n";
                       for (const auto& [m, share] : a.split)
                         out << "member " << name_at(names, m) << "=" << format_number(share) << "\n";
                       break;
                   }
                 },
                 [&](const games::SchedulerAction& a) { out << "option=" << a.option << "\n"; },
                 [&](const games::HupiAction& a) { out << "bid=" << a.bid << "\n"; }},
             action);
  return out.str();
}

std::string render_action_block(const games::GameAction& action, std::span<const std::string> names) {
  return "```action\n" + render_action(action, names) + "```";
}

std::optional<games::GameAction> parse_action(std::string_view text, GameKind kind,
                                              std::span<const std::string> names, std::string* error) {
  auto body = block_body(text, "action");
  if (!body) return fail<games::GameAction>(error, "no ```action block found");
  auto lines = lines_of(*body);
  if (lines.empty()) return fail<games::GameAction>(error, "empty action block");
  std::string_view key, value;

  switch (kind) {
    case GameKind::Survivor: {
      games::SurvivorAction a;
      if (lines.size() == 1 && lines[0] == "hold") return a;
      for (auto line : lines) {
        if (!line.starts_with("attack ")) return fail<games::GameAction>(error, "expected 'attack <name>=<ammo>' or 'hold'");
        if (!split_kv(line.substr(7), key, value)) return fail<games::GameAction>(error, "malformed attack line");
        auto seat = seat_named(names, key);
        if (!seat) return fail<games::GameAction>(error, "unknown player '" + std::string(key) + "'");
        auto amount = to_int(value);
        if (!amount) return fail<games::GameAction>(error, "ammo must be an integer");
        a.attacks.emplace_back(*seat, *amount);
      }
      std::sort(a.attacks.begin(), a.attacks.end());
      return a;
    }
    case GameKind::TragedyOfCommons: {
      if (lines.size() != 1 || !split_kv(lines[0], key, value) || key != "extract")
        return fail<games::GameAction>(error, "expected 'extract=<tonnes>'");
      auto v = to_double(value);
      if (!v) return fail<games::GameAction>(error, "extraction must be a number");
      return games::TragedyAction{*v};
    }
    case GameKind::Coalition: {
      games::CoalitionAction a;
      if (lines.size() == 1 && lines[0] == "pass") return a;
      if (lines.size() == 1 && split_kv(lines[0], key, value) && key == "accept") {
        auto id = to_int(value);
        if (!id) return fail<games::GameAction>(error, "proposal id must be an integer");
        a.type = games::CoalitionAction::Type::Accept;
        a.proposal_id = *id;
        return a;
      }
      if (lines[0] != "propose") return fail<games::GameAction>(error, "expected 'pass', 'accept=<id>' or 'propose'");
      a.type = games::CoalitionAction::Type::Propose;
      for (std::size_t i = 1; i < lines.size(); ++i) {
        if (!lines[i].starts_with("member ") || !split_kv(lines[i].substr(7), key, value))
          return fail<games::GameAction>(error, "expected 'member <name>=<share>'");
        auto seat = seat_named(names, key);
        if (!seat) return fail<games::GameAction>(error, "unknown player '" + std::string(key) + "'");
        auto share = to_double(value);
        if (!share) return fail<games::GameAction>(error, "share must be a number");
        a.split.emplace_back(*seat, *share);
      }
      if (a.split.empty()) return fail<games::GameAction>(error, "a proposal needs members");
      std::sort(a.split.begin(), a.split.end());
      return a;
    }
    case GameKind::Scheduler: {
      if (lines.size() != 1 || !split_kv(lines[0], key, value) || key != "option")
        return fail<games::GameAction>(error, "expected 'option=<index>'");
      auto v = to_int(value);
      if (!v) return fail<games::GameAction>(error, "option must be an integer");
      return games::SchedulerAction{*v};
    }
    case GameKind::HUPI: {
      if (lines.size() != 1 || !split_kv(lines[0], key, value) || key != "bid")
        return fail<games::GameAction>(error, "expected 'bid=<integer>'");
      auto v = to_int(value);
      if (!v) return fail<games::GameAction>(error, "bid must be an integer");
      return games::HupiAction{*v};
    }
  }
  return fail<games::GameAction>(error, "unknown game");
}

std::string render_prediction(const games::PredictionPayload& payload, std::span<const std::string> names) {
  return std::visit(
      Overloaded{
          [&](const games::SurvivorPrediction& p) {
            return "target=" + (p.target ? name_at(names, *p.target) : std::string("none"));
          },
          [&](const games::TragedyPrediction& p) { return "extract=" + format_number(p.extraction); },
          [&](const games::CoalitionPrediction& p) { return "stance=" + std::string(games::to_string(p.stance)); },
          [&](const games::SchedulerPrediction& p) { return "option=" + std::to_string(p.option); },
          [&](const games::HupiPrediction& p) { return "bid=" + std::to_string(p.bid); }},
      payload);
}

std::string render_prediction_block(const games::PredictionPayload& payload,
                                    std::span<const std::string> names) {
  return "```prediction\n" + render_prediction(payload, names) + "\n```";
}

std::optional<games::PredictionPayload> parse_prediction(std::string_view text, GameKind kind,
                                                         std::span<const std::string> names,
                                                         std::string* error) {
  auto body = block_body(text, "prediction");
  if (!body) return fail<games::PredictionPayload>(error, "no ```prediction block found");
  auto lines = lines_of(*body);
  std::string_view key, value;
  if (lines.size() != 1 || !split_kv(lines[0], key, value))
    return fail<games::PredictionPayload>(error, "expected a single key=value line");
  switch (kind) {
    case GameKind::Survivor: {
      if (key != "target") return fail<games::PredictionPayload>(error, "expected 'target=<name|none>'");
      if (value == "none") return games::SurvivorPrediction{};
      auto seat = seat_named(names, value);
      if (!seat) return fail<games::PredictionPayload>(error, "unknown player '" + std::string(value) + "'");
      return games::SurvivorPrediction{*seat};
    }
    case GameKind::TragedyOfCommons: {
      auto v = key == "extract" ? to_double(value) : std::nullopt;
      if (!v) return fail<games::PredictionPayload>(error, "expected 'extract=<tonnes>'");
      return games::TragedyPrediction{*v};
    }
    case GameKind::Coalition: {
      auto s = key == "stance" ? games::parse_stance(value) : std::nullopt;
      if (!s) return fail<games::PredictionPayload>(error, "expected 'stance=<propose|accept|pass>'");
      return games::CoalitionPrediction{*s};
    }
    case GameKind::Scheduler: {
      auto v = key == "option" ? to_int(value) : std::nullopt;
      if (!v) return fail<games::PredictionPayload>(error, "expected 'option=<index>'");
      return games::SchedulerPrediction{*v};
    }
    case GameKind::HUPI: {
      auto v = key == "bid" ? to_int(value) : std::nullopt;
      if (!v) return fail<games::PredictionPayload>(error, "expected 'bid=<integer>'");
      return games::HupiPrediction{*v};
    }
  }
  return fail<games::PredictionPayload>(error, "unknown game");
}

std::string strip_block(std::string_view text, std::string_view tag) {
  const std::string open = "```" + std::string(tag);
  auto pos = text.find(open);
  if (pos == std::string_view::npos) return std::string(trim(text));
  auto close = text.find("```", pos + open.size());
  std::string out(text.substr(0, pos));
  if (close != std::string_view::npos) out += text.substr(close + 3);
  return std::string(trim(out));
}

std::string action_grammar(GameKind kind) {
  switch (kind) {
    case GameKind::Survivor:
      return "```action\nattack <name>=<amount>\n```\n(one attack line per target, or the single line `hold`)";
    case GameKind::TragedyOfCommons: return "```action\nextract=<amount>\n```";
    case GameKind::Coalition:
      return "```action\npropose\nmember <name>=<share>\nmember <name>=<share>\n```\n"
             "(include yourself; shares must add up to the full prize), or the single line "
             "`accept=<proposal id>`, or the single line `pass`";
    case GameKind::Scheduler: return "```action\noption=<index>\n```";
    case GameKind::HUPI: return "```action\nbid=<integer>\n```";
  }
  return {};
}

std::string prediction_grammar(GameKind kind) {
  switch (kind) {
    case GameKind::Survivor: return "```prediction\ntarget=<name of the player they will attack most, or none>\n```";
    case GameKind::TragedyOfCommons: return "```prediction\nextract=<amount>\n```";
    case GameKind::Coalition: return "```prediction\nstance=<propose|accept|pass>\n```";
    case GameKind::Scheduler: return "```prediction\noption=<index>\n```";
    case GameKind::HUPI: return "```prediction\nbid=<integer>\n```";
  }
  return {};
}

}  // namespace arena::grammar
