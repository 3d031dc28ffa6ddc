#include "arena/records.hpp"

#include <algorithm>

namespace arena {

bool ConversationRecord::silent() const {
  return std::all_of(messages.begin(), messages.end(),
                     [](const Message& m) { return m.text.empty(); });
}

double MatchRecord::reward_of_seat(int seat) const {
  return rewards.at(spec.roster.at(static_cast<std::size_t>(seat)).name);
}

std::map<std::string, double> MatchRecord::rewards_by_model() const {
  std::map<std::string, double> out;
  for (const auto& a : spec.roster) out[a.model_key] = rewards.at(a.name);
  return out;
}

const std::string& MatchRecord::model_of(std::string_view name) const {
  int seat = spec.seat_of_name(name);
  if (seat < 0) throw ContractViolation("unknown player '" + std::string(name) + "'");
  return spec.roster[static_cast<std::size_t>(seat)].model_key;
}

std::vector<games::GameState> replay_states(const MatchRecord& record) {
  std::vector<games::GameState> states;
  states.push_back(games::new_state(record.spec, record.params));
  for (const auto& round : record.rounds) {
    const auto& cur = states.back();
    std::vector<std::optional<games::GameAction>> actions(static_cast<std::size_t>(cur.n));
    for (const auto& t : round.turns) {
      int seat = record.spec.seat_of_name(t.agent);
      if (seat < 0) throw TraceError("turn by unknown player '" + t.agent + "'");
      actions[static_cast<std::size_t>(seat)] = t.action;
    }
    states.push_back(games::apply_round(cur, actions).first);
  }
  return states;
}

}  // namespace arena
