#include "arena/games.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace arena::games {
namespace {

constexpr double kSplitTolerance = 1e-6;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool valid_seat(const GameState& s, int seat) { return seat >= 0 && seat < s.n; }

bool same_split(const Split& a, const Split& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].first != b[i].first) return false;
    if (std::abs(a[i].second - b[i].second) > 1e-9) return false;
  }
  return true;
}

bool endorses(const CoalitionAction& a, const Proposal& p) {
  if (a.type == CoalitionAction::Type::Accept) return a.proposal_id == p.id;
  if (a.type == CoalitionAction::Type::Propose) return same_split(a.split, p.split);
  return false;
}

const Proposal* find_standing(const CoalitionState& cs, int id) {
  for (const auto& p : cs.standing)
    if (p.id == id) return &p;
  return nullptr;
}

double tragedy_cap(const GameState& s) { return s.as<TragedyState>().stock; }

}  // namespace

std::string_view to_string(Stance s) {
  switch (s) {
    case Stance::Propose: return "propose";
    case Stance::Accept: return "accept";
    case Stance::Pass: return "pass";
  }
  return "pass";
}

std::optional<Stance> parse_stance(std::string_view text) {
  if (text == "propose") return Stance::Propose;
  if (text == "accept") return Stance::Accept;
  if (text == "pass") return Stance::Pass;
  return std::nullopt;
}

int GameState::living_count() const {
  return static_cast<int>(std::count(alive.begin(), alive.end(), true));
}

int scheduler_pref(int n, int player, int option) {
  int diff = ((option - player) % n + n) % n;
  return n - diff;
}

double split_total(const Split& split) {
  double total = 0.0;
  for (const auto& [seat, share] : split) total += share;
  return total;
}

double share_of(const Split& split, int seat) {
  for (const auto& [member, share] : split)
    if (member == seat) return share;
  return 0.0;
}

std::optional<int> hupi_round_winner(std::span<const int> bids) {
  std::map<int, int> counts;
  for (int b : bids) ++counts[b];
  for (auto it = counts.rbegin(); it != counts.rend(); ++it) {
    if (it->second == 1) {
      for (std::size_t i = 0; i < bids.size(); ++i)
        if (bids[i] == it->first) return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

std::optional<int> primary_target(const SurvivorAction& action) {
  std::optional<int> best;
  int best_amount = 0;
  for (const auto& [target, amount] : action.attacks) {
    if (amount > best_amount || (amount == best_amount && best && target < *best)) {
      best = target;
      best_amount = amount;
    }
  }
  return best;
}

GameState new_state(GameKind kind, int n, int max_rounds, const GameParams& params) {
  if (n < kMinPlayers || n > kMaxPlayers) throw ContractViolation("player count out of range");
  GameState s;
  s.kind = kind;
  s.n = n;
  s.max_rounds = max_rounds;
  s.params = params;
  s.alive.assign(static_cast<std::size_t>(n), true);
  const auto un = static_cast<std::size_t>(n);
  switch (kind) {
    case GameKind::Survivor:
      s.payload = SurvivorState{std::vector<int>(un, params.survivor_lives),
                                std::vector<int>(un, params.survivor_ammo),
                                std::vector<std::optional<int>>(un)};
      break;
    case GameKind::TragedyOfCommons:
      s.payload = TragedyState{params.tragedy_stock, std::vector<double>(un, 0.0)};
      break;
    case GameKind::Coalition:
      s.payload = CoalitionState{params.coalition_prize, {}, 0, std::nullopt};
      break;
    case GameKind::Scheduler:
      s.payload = SchedulerState{std::vector<std::optional<int>>(un), std::nullopt};
      break;
    case GameKind::HUPI:
      s.payload = HupiState{params.hupi_range_per_player * n, std::vector<int>(un, 0)};
      break;
  }
  return s;
}

GameState new_state(const MatchSpec& spec, const GameParams& params) {
  return new_state(spec.game, spec.size, spec.max_rounds, params);
}

std::optional<std::string> check_action(const GameState& s, int seat, const GameAction& action) {
  if (!valid_seat(s, seat) || !s.alive[static_cast<std::size_t>(seat)])
    return "actor is not a living player";
  if (kind_of(action) != s.kind) return "action belongs to a different game";
  return std::visit(
      Overloaded{
          [&](const SurvivorAction& a) -> std::optional<std::string> {
            const auto& ss = s.as<SurvivorState>();
            int spent = 0;
            std::set<int> seen;
            for (const auto& [target, amount] : a.attacks) {
              if (!valid_seat(s, target)) return "unknown target";
              if (target == seat) return "cannot attack yourself";
              if (!s.alive[static_cast<std::size_t>(target)]) return "target already eliminated";
              if (amount < 1) return "attack amounts must be positive";
              if (!seen.insert(target).second) return "duplicate target";
              spent += amount;
            }
            if (spent > ss.ammo[static_cast<std::size_t>(seat)]) return "not enough ammunition";
            return std::nullopt;
          },
          [&](const TragedyAction& a) -> std::optional<std::string> {
            if (!std::isfinite(a.extraction) || a.extraction < 0.0)
              return "extraction must be a non-negative number";
            return std::nullopt;  // demands above the stock are clamped
          },
          [&](const CoalitionAction& a) -> std::optional<std::string> {
            const auto& cs = s.as<CoalitionState>();
            switch (a.type) {
              case CoalitionAction::Type::Pass: return std::nullopt;
              case CoalitionAction::Type::Accept: {
                const Proposal* p = find_standing(cs, a.proposal_id);
                if (!p) return "no standing proposal with that id";
                for (const auto& [m, share] : p->split)
                  if (m == seat) return std::nullopt;
                return "you are not a member of that proposal";
              }
              case CoalitionAction::Type::Propose: {
                bool has_self = false;
                int prev = -1;
                for (const auto& [m, share] : a.split) {
                  if (!valid_seat(s, m)) return "unknown coalition member";
                  if (m <= prev) return "members must be distinct and ordered";
                  prev = m;
                  if (!std::isfinite(share) || share < 0.0) return "shares must be non-negative";
                  has_self = has_self || m == seat;
                }
                if (!has_self) return "a proposal must include yourself";
                if (std::abs(split_total(a.split) - cs.prize) > kSplitTolerance)
                  return "shares must sum to the prize";
                return std::nullopt;
              }
            }
            return "bad coalition action";
          },
          [&](const SchedulerAction& a) -> std::optional<std::string> {
            if (a.option < 0 || a.option >= s.n) return "option out of range";
            return std::nullopt;
          },
          [&](const HupiAction& a) -> std::optional<std::string> {
            const int m = s.as<HupiState>().max_bid;
            if (a.bid < 1 || a.bid > m) return "bid out of range";
            return std::nullopt;
          }},
      action);
}

std::optional<std::string> check_prediction(const GameState& s, int target,
                                            const PredictionPayload& payload) {
  if (!valid_seat(s, target)) return "unknown target";
  if (kind_of(payload) != s.kind) return "prediction belongs to a different game";
  return std::visit(
      Overloaded{
          [&](const SurvivorPrediction& p) -> std::optional<std::string> {
            if (p.target && (!valid_seat(s, *p.target) || *p.target == target))
              return "predicted target invalid";
            return std::nullopt;
          },
          [&](const TragedyPrediction& p) -> std::optional<std::string> {
            if (!std::isfinite(p.extraction) || p.extraction < 0.0 ||
                p.extraction > tragedy_cap(s))
              return "predicted extraction out of range";
            return std::nullopt;
          },
          [&](const CoalitionPrediction&) -> std::optional<std::string> { return std::nullopt; },
          [&](const SchedulerPrediction& p) -> std::optional<std::string> {
            if (p.option < 0 || p.option >= s.n) return "predicted option out of range";
            return std::nullopt;
          },
          [&](const HupiPrediction& p) -> std::optional<std::string> {
            if (p.bid < 1 || p.bid > s.as<HupiState>().max_bid) return "predicted bid out of range";
            return std::nullopt;
          }},
      payload);
}

GameAction default_action(const GameState& s, int seat) {
  switch (s.kind) {
    case GameKind::Survivor: return SurvivorAction{};
    case GameKind::TragedyOfCommons: return TragedyAction{0.0};
    case GameKind::Coalition: return CoalitionAction{};
    case GameKind::Scheduler: return SchedulerAction{seat};  // own top option
    case GameKind::HUPI: return HupiAction{1};
  }
  return HupiAction{1};
}

PredictionPayload neutral_prediction(const GameState& s, int target) {
  switch (s.kind) {
    case GameKind::Survivor: return SurvivorPrediction{};
    case GameKind::TragedyOfCommons: return TragedyPrediction{tragedy_cap(s) / 2.0};
    case GameKind::Coalition: return CoalitionPrediction{Stance::Pass};
    case GameKind::Scheduler: return SchedulerPrediction{target};
    case GameKind::HUPI: return HupiPrediction{std::max(1, s.as<HupiState>().max_bid / 2)};
  }
  return HupiPrediction{1};
}

PredictionPayload facet_of(const GameState& s, const GameAction& action) {
  return std::visit(
      Overloaded{
          [&](const SurvivorAction& a) -> PredictionPayload {
            return SurvivorPrediction{primary_target(a)};
          },
          [&](const TragedyAction& a) -> PredictionPayload {
            return TragedyPrediction{std::min(a.extraction, tragedy_cap(s))};
          },
          [&](const CoalitionAction& a) -> PredictionPayload {
            switch (a.type) {
              case CoalitionAction::Type::Propose: return CoalitionPrediction{Stance::Propose};
              case CoalitionAction::Type::Accept: return CoalitionPrediction{Stance::Accept};
              case CoalitionAction::Type::Pass: break;
            }
            return CoalitionPrediction{Stance::Pass};
          },
          [&](const SchedulerAction& a) -> PredictionPayload {
            return SchedulerPrediction{a.option};
          },
          [&](const HupiAction& a) -> PredictionPayload { return HupiPrediction{a.bid}; }},
      action);
}

std::pair<GameState, RoundOutcome> apply_round(const GameState& s,
                                               std::span<const std::optional<GameAction>> actions) {
  if (is_terminal(s)) throw ContractViolation("apply_round on a terminal state");
  if (static_cast<int>(actions.size()) != s.n)
    throw ContractViolation("apply_round needs one action slot per seat");

  GameState next = s;
  RoundOutcome out;
  out.round = s.round;
  out.actions.resize(static_cast<std::size_t>(s.n));
  out.gains.assign(static_cast<std::size_t>(s.n), 0.0);

  std::vector<GameAction> act(static_cast<std::size_t>(s.n), default_action(s, 0));
  for (int i = 0; i < s.n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (!s.alive[ui]) continue;
    const auto& a = actions[ui];
    if (a && !check_action(s, i, *a)) {
      act[ui] = *a;
    } else {
      act[ui] = default_action(s, i);
      out.substituted.push_back(i);
    }
    out.actions[ui] = act[ui];
  }

  switch (s.kind) {
    case GameKind::Survivor: {
      auto& ss = next.as<SurvivorState>();
      std::vector<int> damage(static_cast<std::size_t>(s.n), 0);
      for (int i = 0; i < s.n; ++i) {
        if (!s.alive[static_cast<std::size_t>(i)]) continue;
        const auto& a = std::get<SurvivorAction>(act[static_cast<std::size_t>(i)]);
        for (const auto& [target, amount] : a.attacks) {
          damage[static_cast<std::size_t>(target)] += amount;
          ss.ammo[static_cast<std::size_t>(i)] -= amount;
        }
      }
      int ammo_left = 0;
      for (int i = 0; i < s.n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (!s.alive[ui]) continue;
        ss.lives[ui] = std::max(0, ss.lives[ui] - damage[ui]);
        if (ss.lives[ui] == 0) {
          next.alive[ui] = false;
          ss.eliminated_round[ui] = s.round;
          out.eliminated.push_back(i);
        } else {
          ammo_left += ss.ammo[ui];
        }
      }
      // Nobody can act any more once ammunition is gone; the remaining rounds
      // would not change any reward.
      out.game_over = next.living_count() <= 1 || ammo_left == 0;
      break;
    }
    case GameKind::TragedyOfCommons: {
      auto& ts = next.as<TragedyState>();
      const double stock = ts.stock;
      std::vector<double> demand(static_cast<std::size_t>(s.n), 0.0);
      double total_demand = 0.0;
      for (int i = 0; i < s.n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        demand[ui] = std::min(std::get<TragedyAction>(act[ui]).extraction, stock);
        total_demand += demand[ui];
      }
      double hauled = 0.0;
      if (total_demand <= stock) {
        for (int i = 0; i < s.n; ++i) out.gains[static_cast<std::size_t>(i)] = demand[static_cast<std::size_t>(i)];
        hauled = total_demand;
      } else {
        for (int i = 0; i < s.n; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          out.gains[ui] = stock * (demand[ui] / total_demand);
        }
        hauled = stock;  // rationing hands out the whole stock
      }
      for (int i = 0; i < s.n; ++i) ts.hauls[static_cast<std::size_t>(i)] += out.gains[static_cast<std::size_t>(i)];
      ts.stock = std::min(s.params.tragedy_stock_cap, s.params.tragedy_regrowth * (stock - hauled));
      out.total_hauled = hauled;
      out.stock_after = ts.stock;
      out.game_over = ts.stock <= 0.0;
      break;
    }
    case GameKind::Coalition: {
      auto& cs = next.as<CoalitionState>();
      const auto& before = s.as<CoalitionState>();
      for (const auto& p : before.standing) {
        if (2 * static_cast<int>(p.split.size()) <= s.n) continue;
        bool all = true;
        for (const auto& [m, share] : p.split) {
          const auto um = static_cast<std::size_t>(m);
          if (!s.alive[um] || !endorses(std::get<CoalitionAction>(act[um]), p)) {
            all = false;
            break;
          }
        }
        if (all) {
          cs.formed = p;
          out.formed_proposal = p.id;
          for (const auto& [m, share] : p.split) out.gains[static_cast<std::size_t>(m)] = share;
          break;
        }
      }
      if (!cs.formed) {
        for (int i = 0; i < s.n; ++i) {
          const auto& a = std::get<CoalitionAction>(act[static_cast<std::size_t>(i)]);
          if (a.type != CoalitionAction::Type::Propose) continue;
          std::erase_if(cs.standing, [&](const Proposal& p) { return p.proposer == i; });
          cs.standing.push_back(Proposal{cs.next_id++, i, a.split});
        }
      }
      out.game_over = cs.formed.has_value();
      break;
    }
    case GameKind::Scheduler: {
      auto& sc = next.as<SchedulerState>();
      std::optional<int> common;
      bool unanimous = true;
      for (int i = 0; i < s.n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (!s.alive[ui]) continue;
        int opt = std::get<SchedulerAction>(act[ui]).option;
        sc.last_choice[ui] = opt;
        if (!common) common = opt;
        else if (*common != opt) unanimous = false;
      }
      if (unanimous && common) {
        sc.agreed = common;
        out.agreed_option = common;
        for (int i = 0; i < s.n; ++i)
          out.gains[static_cast<std::size_t>(i)] = scheduler_pref(s.n, i, *common);
      }
      out.game_over = sc.agreed.has_value();
      break;
    }
    case GameKind::HUPI: {
      auto& hs = next.as<HupiState>();
      std::vector<int> bids;
      for (int i = 0; i < s.n; ++i) bids.push_back(std::get<HupiAction>(act[static_cast<std::size_t>(i)]).bid);
      out.winner = hupi_round_winner(bids);
      if (out.winner) {
        hs.wins[static_cast<std::size_t>(*out.winner)] += 1;
        out.gains[static_cast<std::size_t>(*out.winner)] = 1.0;
      }
      out.game_over = false;
      break;
    }
  }
  next.round = s.round + 1;
  next.over = out.game_over;
  return {std::move(next), std::move(out)};
}

bool is_terminal(const GameState& s) { return s.over || s.round >= s.max_rounds; }

std::vector<double> terminal_rewards(const GameState& s) {
  if (!is_terminal(s)) throw ContractViolation("terminal_rewards called on a non-terminal state");
  std::vector<double> r(static_cast<std::size_t>(s.n), 0.0);
  switch (s.kind) {
    case GameKind::Survivor: {
      const auto& ss = s.as<SurvivorState>();
      const int survivors = s.living_count();
      for (int i = 0; i < s.n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (ss.eliminated_round[ui]) r[ui] = *ss.eliminated_round[ui];
        else if (survivors == 1) r[ui] = s.max_rounds + s.params.survivor_winner_bonus;
        else r[ui] = s.max_rounds;
      }
      break;
    }
    case GameKind::TragedyOfCommons:
      r = s.as<TragedyState>().hauls;
      break;
    case GameKind::Coalition: {
      const auto& cs = s.as<CoalitionState>();
      if (cs.formed)
        for (const auto& [m, share] : cs.formed->split) r[static_cast<std::size_t>(m)] = share;
      break;
    }
    case GameKind::Scheduler: {
      const auto& sc = s.as<SchedulerState>();
      if (sc.agreed)
        for (int i = 0; i < s.n; ++i) r[static_cast<std::size_t>(i)] = scheduler_pref(s.n, i, *sc.agreed);
      break;
    }
    case GameKind::HUPI: {
      const auto& hs = s.as<HupiState>();
      for (int i = 0; i < s.n; ++i) r[static_cast<std::size_t>(i)] = hs.wins[static_cast<std::size_t>(i)];
      break;
    }
  }
  return r;
}

double assertiveness(const GameState& s, int seat, const GameAction& action) {
  const auto us = static_cast<std::size_t>(seat);
  double v = std::visit(
      Overloaded{
          [&](const SurvivorAction& a) -> double {
            const int own = s.as<SurvivorState>().ammo[us];
            if (own <= 0) return 0.0;
            int spent = 0;
            for (const auto& [t, amount] : a.attacks) spent += amount;
            return static_cast<double>(spent) / own;
          },
          [&](const TragedyAction& a) -> double {
            const double stock = tragedy_cap(s);
            if (stock <= 0.0) return 0.0;
            return std::min(1.0, a.extraction / stock);
          },
          [&](const CoalitionAction& a) -> double {
            const auto& cs = s.as<CoalitionState>();
            if (cs.prize <= 0.0) return 0.0;
            switch (a.type) {
              case CoalitionAction::Type::Pass: return 0.0;
              case CoalitionAction::Type::Propose: return share_of(a.split, seat) / cs.prize;
              case CoalitionAction::Type::Accept: {
                const Proposal* p = find_standing(cs, a.proposal_id);
                return p ? share_of(p->split, seat) / cs.prize : 0.0;
              }
            }
            return 0.0;
          },
          [&](const SchedulerAction& a) -> double {
            return static_cast<double>(scheduler_pref(s.n, seat, a.option)) / s.n;
          },
          [&](const HupiAction& a) -> double {
            return static_cast<double>(a.bid) / s.as<HupiState>().max_bid;
          }},
      action);
  return std::clamp(v, 0.0, 1.0);
}

double prediction_score(const GameState& s, const PredictionPayload& predicted,
                        const GameAction& actual) {
  if (kind_of(predicted) != kind_of(actual) || kind_of(actual) != s.kind)
    throw ContractViolation("prediction and action belong to different games");
  const PredictionPayload truth = facet_of(s, actual);
  double v = 0.0;
  switch (s.kind) {
    case GameKind::Survivor:
    case GameKind::Scheduler:
    case GameKind::Coalition:
      v = predicted == truth ? 1.0 : 0.0;
      break;
    case GameKind::HUPI: {
      const int m = s.as<HupiState>().max_bid;
      const int diff = std::abs(std::get<HupiPrediction>(predicted).bid - std::get<HupiPrediction>(truth).bid);
      v = m > 1 ? 1.0 - static_cast<double>(diff) / (m - 1) : (diff == 0 ? 1.0 : 0.0);
      break;
    }
    case GameKind::TragedyOfCommons: {
      const double cap = tragedy_cap(s);
      const double diff = std::abs(std::get<TragedyPrediction>(predicted).extraction -
                                   std::get<TragedyPrediction>(truth).extraction);
      v = cap > 0.0 ? 1.0 - diff / cap : (diff == 0.0 ? 1.0 : 0.0);
      break;
    }
  }
  return std::clamp(v, 0.0, 1.0);
}

GameState redact(const GameState& s, int viewer) {
  GameState v = s;
  if (s.kind == GameKind::Survivor) {
    auto& ss = v.as<SurvivorState>();
    for (int i = 0; i < s.n; ++i) {
      if (i == viewer) continue;
      ss.lives[static_cast<std::size_t>(i)] = -1;
      ss.ammo[static_cast<std::size_t>(i)] = -1;
    }
  }
  return v;
}

}  // namespace arena::games
