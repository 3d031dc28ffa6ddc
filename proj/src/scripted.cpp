#include "arena/scripted.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "arena/grammar.hpp"

namespace arena::scripted {
namespace {

using games::GameAction;
using games::PredictionPayload;

// Explicit mappings keep bot behavior independent of the standard library's
// distribution implementations.
int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::mt19937_64 rng_for(const StageContext& ctx, std::uint64_t salt) {
  return std::mt19937_64(mix_seed(ctx.seed, salt));
}

std::vector<std::string_view> line_split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::optional<PredictionPayload> parse_intent(const StageContext& ctx, std::string_view text) {
  std::optional<PredictionPayload> found;
  for (auto line : line_split(text)) {
    auto pos = line.find(kIntentTag);
    if (pos == std::string_view::npos) continue;
    auto payload = grammar::parse_prediction(line.substr(pos + kIntentTag.size()), ctx.game, ctx.names);
    if (payload) found = payload;
  }
  return found;
}

std::string intent_suffix(const StageContext& ctx, const PredictionPayload& p) {
  return std::string(" ") + std::string(kIntentTag) + grammar::render_prediction(p, ctx.names);
}

std::vector<int> others_alive(const games::GameState& view, int seat) {
  std::vector<int> out;
  for (int i = 0; i < view.n; ++i)
    if (i != seat && view.alive[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

// Damage each seat has taken so far; attacks are public.
std::vector<int> damage_taken(const StageContext& ctx) {
  std::vector<int> dmg(static_cast<std::size_t>(ctx.view.n), 0);
  for (const auto& o : ctx.history)
    for (const auto& a : o.actions)
      if (a)
        for (const auto& [t, n] : std::get<games::SurvivorAction>(*a).attacks) dmg[static_cast<std::size_t>(t)] += n;
  return dmg;
}

std::vector<int> damage_dealt_to(const StageContext& ctx, int victim) {
  std::vector<int> by(static_cast<std::size_t>(ctx.view.n), 0);
  for (const auto& o : ctx.history)
    for (std::size_t s = 0; s < o.actions.size(); ++s)
      if (o.actions[s])
        for (const auto& [t, n] : std::get<games::SurvivorAction>(*o.actions[s]).attacks)
          if (t == victim) by[s] += n;
  return by;
}

games::Split equal_split(std::vector<int> members, double prize) {
  std::sort(members.begin(), members.end());
  games::Split split;
  const double each = prize / static_cast<double>(members.size());
  double used = 0.0;
  for (std::size_t i = 0; i + 1 < members.size(); ++i) {
    split.emplace_back(members[i], each);
    used += each;
  }
  split.emplace_back(members.back(), prize - used);
  return split;
}

int majority(int n) { return n / 2 + 1; }

// The standing majority proposal that gives `seat` the largest share (lowest id on ties).
const games::Proposal* best_standing_for(const games::GameState& view, int seat) {
  const auto& cs = view.as<games::CoalitionState>();
  const games::Proposal* best = nullptr;
  double best_share = -1.0;
  for (const auto& p : cs.standing) {
    if (2 * static_cast<int>(p.split.size()) <= view.n) continue;
    bool member = false;
    for (const auto& [m, s] : p.split) member = member || m == seat;
    if (!member) continue;
    double share = games::share_of(p.split, seat);
    if (share > best_share + 1e-12) {
      best = &p;
      best_share = share;
    }
  }
  return best;
}

std::optional<int> modal_last_choice(const StageContext& ctx, int exclude) {
  if (ctx.history.empty()) return std::nullopt;
  std::map<int, int> counts;
  const auto& last = ctx.history.back();
  for (std::size_t s = 0; s < last.actions.size(); ++s)
    if (last.actions[s] && static_cast<int>(s) != exclude)
      ++counts[std::get<games::SchedulerAction>(*last.actions[s]).option];
  if (counts.empty()) return std::nullopt;
  int best = counts.begin()->first, best_count = 0;
  for (const auto& [opt, c] : counts)
    if (c > best_count) {
      best = opt;
      best_count = c;
    }
  return best;
}

std::optional<GameAction> last_action_of(const StageContext& ctx, int seat) {
  for (auto it = ctx.history.rbegin(); it != ctx.history.rend(); ++it)
    if ((*it).actions[static_cast<std::size_t>(seat)]) return *(*it).actions[static_cast<std::size_t>(seat)];
  return std::nullopt;
}

double sustainable_total(const games::GameState& view) {
  const double stock = view.as<games::TragedyState>().stock;
  const double g = view.params.tragedy_regrowth;
  return g > 1.0 ? stock * (1.0 - 1.0 / g) : 0.0;
}

ActionBlock block(std::string reasoning, GameAction action) {
  ActionBlock b;
  b.reasoning = std::move(reasoning);
  b.action = std::move(action);
  return b;
}

}  // namespace

// ---- shared helpers --------------------------------------------------------

std::optional<PredictionPayload> announced_intent(const StageContext& ctx, int target) {
  const std::string& name = ctx.names.at(static_cast<std::size_t>(target));
  std::optional<PredictionPayload> found;
  for (const auto& c : ctx.conversations) {
    if (c.round != ctx.round || !c.involves(name)) continue;
    for (const auto& m : c.messages)
      if (m.speaker == name)
        if (auto p = parse_intent(ctx, m.text)) found = p;
  }
  if (found && games::check_prediction(ctx.view, target, *found)) {
    if (ctx.game != GameKind::TragedyOfCommons) return std::nullopt;
    // announced hauls above the stock are clamped like demands are
    auto& t = std::get<games::TragedyPrediction>(*found);
    t.extraction = std::clamp(t.extraction, 0.0, ctx.view.as<games::TragedyState>().stock);
  }
  return found;
}

PredictionPayload informed_prediction(const StageContext& ctx, int target) {
  if (auto p = announced_intent(ctx, target)) return *p;
  if (auto last = last_action_of(ctx, target)) {
    auto f = games::facet_of(ctx.view, *last);
    if (auto* s = std::get_if<games::SurvivorPrediction>(&f))
      if (s->target && !ctx.view.alive[static_cast<std::size_t>(*s->target)]) s->target.reset();
    if (!games::check_prediction(ctx.view, target, f)) return f;
  }
  return games::neutral_prediction(ctx.view, target);
}

GameAction random_action(const games::GameState& view, int seat, std::mt19937_64& rng) {
  switch (view.kind) {
    case GameKind::Survivor: {
      const int ammo = view.as<games::SurvivorState>().ammo[static_cast<std::size_t>(seat)];
      auto opp = others_alive(view, seat);
      games::SurvivorAction a;
      if (ammo <= 0 || opp.empty()) return a;
      const int amount = uniform_int(rng, 0, ammo);
      if (amount == 0) return a;
      a.attacks.emplace_back(opp[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(opp.size()) - 1))], amount);
      return a;
    }
    case GameKind::TragedyOfCommons:
      return games::TragedyAction{view.as<games::TragedyState>().stock * uniform01(rng)};
    case GameKind::Coalition: {
      const auto& cs = view.as<games::CoalitionState>();
      const int choice = uniform_int(rng, 0, 2);
      if (choice == 1) {
        std::vector<int> ids;
        for (const auto& p : cs.standing)
          for (const auto& [m, s] : p.split)
            if (m == seat) ids.push_back(p.id);
        if (ids.empty()) return games::CoalitionAction{};
        games::CoalitionAction a;
        a.type = games::CoalitionAction::Type::Accept;
        a.proposal_id = ids[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(ids.size()) - 1))];
        return a;
      }
      if (choice == 2) {
        auto others = others_alive(view, seat);
        for (std::size_t i = others.size(); i > 1; --i)
          std::swap(others[i - 1], others[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i) - 1))]);
        const int size = uniform_int(rng, majority(view.n), view.n);
        std::vector<int> members{seat};
        for (int i = 0; i + 1 < size && i < static_cast<int>(others.size()); ++i)
          members.push_back(others[static_cast<std::size_t>(i)]);
        std::sort(members.begin(), members.end());
        std::vector<double> w;
        double total = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
          w.push_back(0.05 + uniform01(rng));
          total += w.back();
        }
        games::CoalitionAction a;
        a.type = games::CoalitionAction::Type::Propose;
        double used = 0.0;
        for (std::size_t i = 0; i + 1 < members.size(); ++i) {
          const double share = cs.prize * w[i] / total;
          a.split.emplace_back(members[i], share);
          used += share;
        }
        a.split.emplace_back(members.back(), cs.prize - used);
        return a;
      }
      return games::CoalitionAction{};
    }
    case GameKind::Scheduler: return games::SchedulerAction{uniform_int(rng, 0, view.n - 1)};
    case GameKind::HUPI: return games::HupiAction{uniform_int(rng, 1, view.as<games::HupiState>().max_bid)};
  }
  return games::default_action(view, seat);
}

PredictionPayload random_prediction(const games::GameState& view, int target, std::mt19937_64& rng) {
  switch (view.kind) {
    case GameKind::Survivor: {
      auto opp = others_alive(view, target);
      const int pick = uniform_int(rng, 0, static_cast<int>(opp.size()));
      if (pick == static_cast<int>(opp.size())) return games::SurvivorPrediction{};
      return games::SurvivorPrediction{opp[static_cast<std::size_t>(pick)]};
    }
    case GameKind::TragedyOfCommons:
      return games::TragedyPrediction{view.as<games::TragedyState>().stock * uniform01(rng)};
    case GameKind::Coalition: return games::CoalitionPrediction{static_cast<games::Stance>(uniform_int(rng, 0, 2))};
    case GameKind::Scheduler: return games::SchedulerPrediction{uniform_int(rng, 0, view.n - 1)};
    case GameKind::HUPI: return games::HupiPrediction{uniform_int(rng, 1, view.as<games::HupiState>().max_bid)};
  }
  return games::neutral_prediction(view, target);
}

double hupi_win_probability(int bid, int opponents, const std::vector<double>& dist) {
  const int m = static_cast<int>(dist.size());
  if (bid < 1 || bid > m) return 0.0;
  // Multinomial weights: g[r] accumulates prod p_v^c / c! over assignments of
  // r opponents to values above `bid` with no value chosen exactly once.
  std::vector<double> g(static_cast<std::size_t>(opponents) + 1, 0.0);
  g[0] = 1.0;
  for (int v = bid + 1; v <= m; ++v) {
    const double p = dist[static_cast<std::size_t>(v - 1)];
    std::vector<double> next(g.size(), 0.0);
    for (int r = 0; r <= opponents; ++r) {
      if (g[static_cast<std::size_t>(r)] == 0.0) continue;
      double term = 1.0;  // p^c / c!
      for (int c = 0; r + c <= opponents; ++c) {
        if (c > 0) term *= p / c;
        if (c != 1) next[static_cast<std::size_t>(r + c)] += g[static_cast<std::size_t>(r)] * term;
      }
    }
    g = std::move(next);
  }
  double below = 0.0;
  for (int u = 1; u < bid; ++u) below += dist[static_cast<std::size_t>(u - 1)];
  double total = 0.0, fact_rest = 1.0;
  // sum_r g[r] * below^(k-r) / (k-r)!, then times k!
  for (int r = opponents; r >= 0; --r) {
    const int rest = opponents - r;
    if (rest > 0) fact_rest *= rest;
    total += g[static_cast<std::size_t>(r)] * std::pow(below, rest) / fact_rest;
  }
  double kfact = 1.0;
  for (int i = 2; i <= opponents; ++i) kfact *= i;
  return total * kfact;
}

int klevel_bid(int k, int n, int max_bid) {
  if (k < 1) throw ContractViolation("klevel_bid needs k >= 1");
  std::vector<double> dist(static_cast<std::size_t>(max_bid), 1.0 / max_bid);
  int bid = max_bid;
  for (int level = 1; level <= k; ++level) {
    double best = -1.0;
    for (int b = 1; b <= max_bid; ++b) {
      const double p = hupi_win_probability(b, n - 1, dist);
      if (p >= best - 1e-15) {
        best = std::max(best, p);
        bid = b;
      }
    }
    std::fill(dist.begin(), dist.end(), 0.0);
    dist[static_cast<std::size_t>(bid - 1)] = 1.0;
  }
  return bid;
}

GameAction best_response(const StageContext& ctx, const std::vector<std::optional<PredictionPayload>>& predicted,
                         std::mt19937_64& rng) {
  const auto& view = ctx.view;
  const int me = ctx.seat;
  const auto opp = others_alive(view, me);
  auto pred = [&](int seat) -> PredictionPayload {
    const auto& p = predicted[static_cast<std::size_t>(seat)];
    return p ? *p : games::neutral_prediction(view, seat);
  };
  constexpr double kTrust = 0.6;  // weight on a point prediction being exactly right

  switch (view.kind) {
    case GameKind::HUPI: {
      const int m = view.as<games::HupiState>().max_bid;
      constexpr int kSamples = 400;
      std::vector<int> wins(static_cast<std::size_t>(m) + 1, 0);
      std::vector<int> count(static_cast<std::size_t>(m) + 1);
      for (int s = 0; s < kSamples; ++s) {
        std::fill(count.begin(), count.end(), 0);
        for (int j : opp) {
          int b = std::get<games::HupiPrediction>(pred(j)).bid;
          if (uniform01(rng) >= kTrust) b = uniform_int(rng, 1, m);
          ++count[static_cast<std::size_t>(b)];
        }
        int highest_unique = 0;
        for (int v = m; v >= 1; --v)
          if (count[static_cast<std::size_t>(v)] == 1) {
            highest_unique = v;
            break;
          }
        for (int b = highest_unique + 1; b <= m; ++b)
          if (count[static_cast<std::size_t>(b)] == 0) ++wins[static_cast<std::size_t>(b)];
      }
      int best = m;
      for (int b = m; b >= 1; --b)
        if (wins[static_cast<std::size_t>(b)] > wins[static_cast<std::size_t>(best)]) best = b;
      return games::HupiAction{best};
    }
    case GameKind::TragedyOfCommons: {
      const double stock = view.as<games::TragedyState>().stock;
      if (ctx.round >= view.max_rounds - 1) return games::TragedyAction{stock};
      double others = 0.0;
      for (int j : opp) others += std::min(stock, std::get<games::TragedyPrediction>(pred(j)).extraction);
      const double keep = sustainable_total(view);
      // Once the others overfish anyway, the largest demand gets the largest ration.
      if (others >= keep) return games::TragedyAction{stock};
      return games::TragedyAction{keep - others};
    }
    case GameKind::Survivor: {
      const auto& ss = view.as<games::SurvivorState>();
      int ammo = ss.ammo[static_cast<std::size_t>(me)];
      games::SurvivorAction a;
      if (ammo <= 0 || opp.empty()) return a;
      const auto dmg = damage_taken(ctx);
      std::vector<std::pair<int, int>> est;  // (estimated lives, seat); all players start equal
      for (int j : opp) est.emplace_back(std::max(1, view.params.survivor_lives - dmg[static_cast<std::size_t>(j)]), j);
      std::sort(est.begin(), est.end());
      std::vector<std::pair<int, int>> threats;
      for (const auto& e : est) {
        const auto p = std::get<games::SurvivorPrediction>(pred(e.second));
        if (p.target && *p.target == me) threats.push_back(e);
      }
      const bool endgame = opp.size() == 1 || ctx.round >= view.max_rounds - 1;
      const auto& order = threats.empty() ? est : threats;
      for (const auto& [lives, j] : order) {
        if (ammo <= 0) break;
        if (lives > ammo && threats.empty() && !endgame) continue;
        const int spend = std::min(lives, ammo);
        a.attacks.emplace_back(j, spend);
        ammo -= spend;
      }
      if (endgame && ammo > 0 && !est.empty()) {
        const int j = est.front().second;
        auto it = std::find_if(a.attacks.begin(), a.attacks.end(), [&](const auto& x) { return x.first == j; });
        if (it == a.attacks.end()) a.attacks.emplace_back(j, ammo);
        else it->second += ammo;
      }
      std::sort(a.attacks.begin(), a.attacks.end());
      return a;
    }
    case GameKind::Coalition: {
      const auto& cs = view.as<games::CoalitionState>();
      if (const games::Proposal* p = best_standing_for(view, me)) {
        games::CoalitionAction a;
        a.type = games::CoalitionAction::Type::Accept;
        a.proposal_id = p->id;
        return a;
      }
      std::vector<std::pair<int, int>> ranked;  // (rank, seat): likely endorsers first
      for (int j : opp) {
        const auto stance = std::get<games::CoalitionPrediction>(pred(j)).stance;
        ranked.emplace_back(stance == games::Stance::Pass ? 1 : 0, j);
      }
      std::sort(ranked.begin(), ranked.end());
      std::vector<int> members{me};
      for (const auto& [rank, j] : ranked)
        if (static_cast<int>(members.size()) < majority(view.n)) members.push_back(j);
      games::CoalitionAction a;
      a.type = games::CoalitionAction::Type::Propose;
      a.split = equal_split(members, cs.prize);
      return a;
    }
    case GameKind::Scheduler: {
      const int n = view.n;
      int best = me;
      double best_score = -1.0;
      for (int o = 0; o < n; ++o) {
        double agree = 1.0;
        for (int j : opp) {
          const int guess = std::get<games::SchedulerPrediction>(pred(j)).option;
          agree *= (guess == o ? kTrust : 0.0) + (1.0 - kTrust) / n;
        }
        const double score = games::scheduler_pref(n, me, o) * agree;
        if (score > best_score + 1e-15) {
          best = o;
          best_score = score;
        }
      }
      return games::SchedulerAction{best};
    }
  }
  return games::default_action(view, me);
}

// ---- SilentBot --------------------------------------------------------------

MessageReply SilentBot::converse(const StageContext&, int, std::span<const Message>) const { return {}; }

PredictionReply SilentBot::predict(const StageContext& ctx, int target) const {
  return {games::neutral_prediction(ctx.view, target), false, {}};
}

ActionBlock SilentBot::act(const StageContext& ctx) const {
  return block("", games::default_action(ctx.view, ctx.seat));
}

// ---- RandomBot --------------------------------------------------------------

MessageReply RandomBot::converse(const StageContext& ctx, int partner, std::span<const Message>) const {
  return {"Hello " + ctx.names.at(static_cast<std::size_t>(partner)) + ", let's see how this goes.", false};
}

PredictionReply RandomBot::predict(const StageContext& ctx, int target) const {
  auto rng = rng_for(ctx, 0x100 + static_cast<std::uint64_t>(target));
  return {random_prediction(ctx.view, target, rng), false, {}};
}

ActionBlock RandomBot::act(const StageContext& ctx) const {
  auto rng = rng_for(ctx, 0x200);
  return block("Picking at random.", random_action(ctx.view, ctx.seat, rng));
}

// ---- GreedyBot --------------------------------------------------------------

GameAction GreedyBot::greedy_action(const StageContext& ctx) {
  const auto& view = ctx.view;
  const int me = ctx.seat;
  switch (view.kind) {
    case GameKind::Survivor: {
      const int ammo = view.as<games::SurvivorState>().ammo[static_cast<std::size_t>(me)];
      auto opp = others_alive(view, me);
      games::SurvivorAction a;
      if (ammo <= 0 || opp.empty()) return a;
      const auto by = damage_dealt_to(ctx, me);
      int target = opp.front();
      for (int j : opp)
        if (by[static_cast<std::size_t>(j)] > by[static_cast<std::size_t>(target)]) target = j;
      a.attacks.emplace_back(target, ammo);
      return a;
    }
    case GameKind::TragedyOfCommons: return games::TragedyAction{view.as<games::TragedyState>().stock};
    case GameKind::Coalition: {
      const auto& cs = view.as<games::CoalitionState>();
      if (const games::Proposal* p = best_standing_for(view, me); p && games::share_of(p->split, me) >= cs.prize / 2) {
        games::CoalitionAction a;
        a.type = games::CoalitionAction::Type::Accept;
        a.proposal_id = p->id;
        return a;
      }
      auto opp = others_alive(view, me);
      std::vector<int> members{me};
      for (int j : opp)
        if (static_cast<int>(members.size()) < majority(view.n)) members.push_back(j);
      std::sort(members.begin(), members.end());
      const double small = cs.prize * 0.1;
      games::CoalitionAction a;
      a.type = games::CoalitionAction::Type::Propose;
      for (int m : members)
        a.split.emplace_back(m, m == me ? cs.prize - small * static_cast<double>(members.size() - 1) : small);
      return a;
    }
    case GameKind::Scheduler: return games::SchedulerAction{me};
    case GameKind::HUPI: return games::HupiAction{view.as<games::HupiState>().max_bid};
  }
  return games::default_action(view, me);
}

MessageReply GreedyBot::converse(const StageContext& ctx, int, std::span<const Message>) const {
  const auto facet = games::facet_of(ctx.view, greedy_action(ctx));
  std::string text;
  switch (ctx.game) {
    case GameKind::TragedyOfCommons:
      text = "I intend to haul " + grammar::format_number(std::get<games::TragedyPrediction>(facet).extraction) +
             " this round.";
      break;
    case GameKind::HUPI: text = "I'm going high. Stay out of my way."; break;
    case GameKind::Scheduler: text = "My choice is fixed; you should come to it."; break;
    case GameKind::Survivor: text = "Cross me and you'll regret it."; break;
    case GameKind::Coalition: text = "I'm putting a deal on the table; take it."; break;
  }
  return {text + intent_suffix(ctx, facet), false};
}

PredictionReply GreedyBot::predict(const StageContext& ctx, int target) const {
  // Assumes everyone else is as greedy as it is.
  StageContext as_target = ctx;
  as_target.seat = target;
  if (ctx.game == GameKind::Survivor) {
    auto opp = others_alive(ctx.view, target);
    if (opp.empty()) return {games::SurvivorPrediction{}, false, {}};
    return {games::SurvivorPrediction{opp.front()}, false, {}};
  }
  if (ctx.game == GameKind::Coalition) return {games::CoalitionPrediction{games::Stance::Propose}, false, {}};
  return {games::facet_of(ctx.view, greedy_action(as_target)), false, {}};
}

ActionBlock GreedyBot::act(const StageContext& ctx) const {
  return block("Taking the largest share available.", greedy_action(ctx));
}

// ---- CooperatorBot ----------------------------------------------------------

GameAction CooperatorBot::cooperative_action(const StageContext& ctx) {
  const auto& view = ctx.view;
  const int me = ctx.seat;
  const auto opp = others_alive(view, me);
  switch (view.kind) {
    case GameKind::TragedyOfCommons:
      return games::TragedyAction{sustainable_total(view) / std::max(1, view.living_count())};
    case GameKind::Survivor: {
      // Holds fire, except against anyone who announced an attack on it or
      // shot at it last round.
      int ammo = view.as<games::SurvivorState>().ammo[static_cast<std::size_t>(me)];
      games::SurvivorAction a;
      std::vector<int> hostile;
      for (int j : opp) {
        bool h = false;
        if (auto p = announced_intent(ctx, j)) {
          auto t = std::get<games::SurvivorPrediction>(*p).target;
          h = t && *t == me;
        }
        if (!ctx.history.empty()) {
          const auto& last = ctx.history.back().actions[static_cast<std::size_t>(j)];
          if (last)
            for (const auto& [t, n] : std::get<games::SurvivorAction>(*last).attacks) h = h || t == me;
        }
        if (h) hostile.push_back(j);
      }
      for (int j : hostile) {
        if (ammo <= 0) break;
        a.attacks.emplace_back(j, 1);
        --ammo;
      }
      return a;
    }
    case GameKind::Coalition: {
      const auto& cs = view.as<games::CoalitionState>();
      if (const games::Proposal* p = best_standing_for(view, me)) {
        games::CoalitionAction a;
        a.type = games::CoalitionAction::Type::Accept;
        a.proposal_id = p->id;
        return a;
      }
      std::vector<int> members{me};
      for (int j : opp) members.push_back(j);
      games::CoalitionAction a;
      a.type = games::CoalitionAction::Type::Propose;
      a.split = equal_split(members, cs.prize);
      return a;
    }
    case GameKind::Scheduler: {
      // Goes along with whatever was announced most; otherwise with last
      // round's most common choice.
      std::map<int, int> votes;
      for (int j : opp)
        if (auto p = announced_intent(ctx, j)) ++votes[std::get<games::SchedulerPrediction>(*p).option];
      if (!votes.empty()) {
        int best = votes.begin()->first, best_count = 0;
        for (const auto& [o, c] : votes)
          if (c > best_count) {
            best = o;
            best_count = c;
          }
        return games::SchedulerAction{best};
      }
      if (auto m = modal_last_choice(ctx, me)) return games::SchedulerAction{*m};
      return games::SchedulerAction{me};
    }
    case GameKind::HUPI: {
      // Steers clear of announced bids, or of last round's bids without news.
      const int m = view.as<games::HupiState>().max_bid;
      std::vector<bool> taken(static_cast<std::size_t>(m) + 1, false);
      bool heard = false;
      for (int j : opp)
        if (auto p = announced_intent(ctx, j)) {
          taken[static_cast<std::size_t>(std::get<games::HupiPrediction>(*p).bid)] = true;
          heard = true;
        }
      if (!heard && !ctx.history.empty())
        for (int j : opp)
          if (const auto& a = ctx.history.back().actions[static_cast<std::size_t>(j)])
            taken[static_cast<std::size_t>(std::get<games::HupiAction>(*a).bid)] = true;
      for (int b = m; b >= 1; --b)
        if (!taken[static_cast<std::size_t>(b)]) return games::HupiAction{b};
      return games::HupiAction{1};
    }
  }
  return games::default_action(view, me);
}

MessageReply CooperatorBot::converse(const StageContext& ctx, int partner, std::span<const Message> transcript) const {
  // Fold what the partner already said into the plan before announcing it.
  StageContext heard = ctx;
  ConversationRecord live;
  live.round = ctx.round;
  live.first = ctx.self_name();
  live.second = ctx.names.at(static_cast<std::size_t>(partner));
  live.messages.assign(transcript.begin(), transcript.end());
  heard.conversations.push_back(std::move(live));
  const auto facet = games::facet_of(ctx.view, cooperative_action(heard));
  return {"Let's keep this fair for everyone. I will stick to my word." + intent_suffix(ctx, facet), false};
}

PredictionReply CooperatorBot::predict(const StageContext& ctx, int target) const {
  return {informed_prediction(ctx, target), false, {}};
}

ActionBlock CooperatorBot::act(const StageContext& ctx) const {
  return block("Keeping my word and the group's interest.", cooperative_action(ctx));
}

// ---- MirrorBot --------------------------------------------------------------

MessageReply MirrorBot::converse(const StageContext&, int, std::span<const Message>) const {
  return {"Whatever you do to me, I will answer in kind.", false};
}

PredictionReply MirrorBot::predict(const StageContext& ctx, int target) const {
  if (auto last = last_action_of(ctx, target)) {
    auto f = games::facet_of(ctx.view, *last);
    if (!games::check_prediction(ctx.view, target, f)) return {f, false, {}};
  }
  return {games::neutral_prediction(ctx.view, target), false, {}};
}

ActionBlock MirrorBot::act(const StageContext& ctx) const {
  const auto& view = ctx.view;
  const int me = ctx.seat;
  const auto opp = others_alive(view, me);
  switch (view.kind) {
    case GameKind::Survivor: {
      int ammo = view.as<games::SurvivorState>().ammo[static_cast<std::size_t>(me)];
      games::SurvivorAction a;
      if (!ctx.history.empty()) {
        const auto& last = ctx.history.back();
        for (int j : opp) {
          const auto& act = last.actions[static_cast<std::size_t>(j)];
          if (!act || ammo <= 0) continue;
          for (const auto& [t, n] : std::get<games::SurvivorAction>(*act).attacks)
            if (t == me && ammo > 0) {
              a.attacks.emplace_back(j, 1);
              --ammo;
              break;
            }
        }
      }
      return block("Answering last round's shots.", a);
    }
    case GameKind::TragedyOfCommons: {
      const double stock = view.as<games::TragedyState>().stock;
      if (ctx.history.empty())
        return block("Starting sustainably.", games::TragedyAction{sustainable_total(view) / view.n});
      double sum = 0.0;
      int count = 0;
      for (int j : opp)
        if (const auto& a = ctx.history.back().actions[static_cast<std::size_t>(j)]) {
          sum += std::get<games::TragedyAction>(*a).extraction;
          ++count;
        }
      return block("Matching what the others took.", games::TragedyAction{std::min(stock, count ? sum / count : 0.0)});
    }
    case GameKind::Coalition: {
      if (const games::Proposal* p = best_standing_for(view, me)) {
        games::CoalitionAction a;
        a.type = games::CoalitionAction::Type::Accept;
        a.proposal_id = p->id;
        return block("Someone offered me a place; accepting.", a);
      }
      return block("Waiting for an offer.", games::CoalitionAction{});
    }
    case GameKind::Scheduler: {
      if (auto m = modal_last_choice(ctx, me)) return block("Following the crowd.", games::SchedulerAction{*m});
      return block("Opening with my favorite.", games::SchedulerAction{me});
    }
    case GameKind::HUPI: {
      const int m = view.as<games::HupiState>().max_bid;
      if (!ctx.history.empty() && ctx.history.back().winner) {
        const auto& w = ctx.history.back().actions[static_cast<std::size_t>(*ctx.history.back().winner)];
        return block("Copying last round's winner.", games::HupiAction{std::get<games::HupiAction>(*w).bid});
      }
      return block("Middle of the road.", games::HupiAction{std::max(1, m / 2)});
    }
  }
  return block("", games::default_action(view, me));
}

// ---- KLevelBot --------------------------------------------------------------

MessageReply KLevelBot::converse(const StageContext&, int, std::span<const Message>) const {
  return {"I'm thinking a few steps ahead of you.", false};
}

PredictionReply KLevelBot::predict(const StageContext& ctx, int target) const {
  if (ctx.game == GameKind::HUPI && k_ >= 2) {
    const int m = ctx.view.as<games::HupiState>().max_bid;
    return {games::HupiPrediction{klevel_bid(k_ - 1, ctx.view.n, m)}, false, {}};
  }
  return {games::neutral_prediction(ctx.view, target), false, {}};
}

ActionBlock KLevelBot::act(const StageContext& ctx) const {
  auto rng = rng_for(ctx, 0x300);
  if (k_ <= 0) return block("Level 0: no model of the others.", random_action(ctx.view, ctx.seat, rng));
  if (ctx.game == GameKind::HUPI) {
    const int m = ctx.view.as<games::HupiState>().max_bid;
    return block("Best response to level " + std::to_string(k_ - 1) + " bidders.",
                 games::HupiAction{klevel_bid(k_, ctx.view.n, m)});
  }
  // Outside HUPI every level responds to neutral expectations of the others.
  std::vector<std::optional<PredictionPayload>> predicted(static_cast<std::size_t>(ctx.view.n));
  return block("Best response to neutral expectations.", best_response(ctx, predicted, rng));
}

// ---- NoisyOracleBot ---------------------------------------------------------

NoisyOracleBot::NoisyOracleBot(double skill) : skill_(skill) {
  if (!(skill >= 0.0 && skill <= 1.0)) throw ValidationError("skill", "skill must be in [0,1]");
}

std::string NoisyOracleBot::describe() const { return "noisy_oracle(" + grammar::format_number(skill_) + ")"; }

MessageReply NoisyOracleBot::converse(const StageContext& ctx, int partner, std::span<const Message> transcript) const {
  StageContext heard = ctx;
  ConversationRecord live;
  live.round = ctx.round;
  live.first = ctx.self_name();
  live.second = ctx.names.at(static_cast<std::size_t>(partner));
  live.messages.assign(transcript.begin(), transcript.end());
  heard.conversations.push_back(std::move(live));
  std::vector<std::optional<PredictionPayload>> predicted(static_cast<std::size_t>(ctx.view.n));
  for (int j : others_alive(ctx.view, ctx.seat)) predicted[static_cast<std::size_t>(j)] = informed_prediction(heard, j);
  auto rng = rng_for(ctx, 0x400 + static_cast<std::uint64_t>(partner));
  const auto plan = best_response(heard, predicted, rng);
  return {"Here is my plan, plainly." + intent_suffix(ctx, games::facet_of(ctx.view, plan)), false};
}

PredictionReply NoisyOracleBot::predict(const StageContext& ctx, int target) const {
  auto rng = rng_for(ctx, 0x500 + static_cast<std::uint64_t>(target));
  if (uniform01(rng) < skill_) return {informed_prediction(ctx, target), false, {}};
  return {random_prediction(ctx.view, target, rng), false, {}};
}

ActionBlock NoisyOracleBot::act(const StageContext& ctx) const {
  auto rng = rng_for(ctx, 0x600);
  if (uniform01(rng) < skill_) {
    std::vector<std::optional<PredictionPayload>> predicted(static_cast<std::size_t>(ctx.view.n));
    for (int j : others_alive(ctx.view, ctx.seat)) predicted[static_cast<std::size_t>(j)] = informed_prediction(ctx, j);
    return block("Best response to what I expect the others to do.", best_response(ctx, predicted, rng));
  }
  return block("Going with my gut.", random_action(ctx.view, ctx.seat, rng));
}

// ---- factory ----------------------------------------------------------------

AgentPtr make_scripted(const nlohmann::json& params) {
  const std::string bot = params.value("bot", "");
  if (bot == "silent") return std::make_shared<SilentBot>();
  if (bot == "random") return std::make_shared<RandomBot>();
  if (bot == "greedy") return std::make_shared<GreedyBot>();
  if (bot == "cooperator") return std::make_shared<CooperatorBot>();
  if (bot == "mirror") return std::make_shared<MirrorBot>();
  if (bot == "klevel") {
    const int k = params.value("k", 1);
    if (k < 0) throw ValidationError("params.k", "k must be non-negative");
    return std::make_shared<KLevelBot>(k);
  }
  if (bot == "noisy_oracle") {
    if (!params.contains("skill") || !params["skill"].is_number())
      throw ValidationError("params.skill", "noisy_oracle needs a numeric skill");
    return std::make_shared<NoisyOracleBot>(params["skill"].get<double>());
  }
  throw ValidationError("params.bot", "unknown scripted bot '" + bot + "'");
}

}  // namespace arena::scripted
