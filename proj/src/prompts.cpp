#include "arena/prompts.hpp"

#include <sstream>

#include "arena/grammar.hpp"

namespace arena::prompts {
namespace {

using grammar::format_number;

std::string join_names(std::span<const std::string> names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += i + 1 == names.size() ? " and " : ", ";
    out += names[i];
  }
  return out;
}

}  // namespace

const Vocabulary& vocabulary(GameKind kind, Framing framing) {
  static const Vocabulary table[kNumGames][2] = {
      // Coalition
      {{"Rival founders may pool their equal stakes into a venture and agree how its grant is divided.",
        "founders", "grant credits", "claim"},
       {"Treasure hunters may join an expedition together and agree how the treasure is shared.",
        "treasure hunters", "gold coins", "claim"}},
      // Scheduler
      {{"Band members must agree on one rehearsal slot; each prefers different slots.", "band members", "slot",
        "push for"},
       {"Colleagues must agree on one restaurant for a team dinner; each prefers different places.", "colleagues",
        "restaurant", "push for"}},
      // Tragedy
      {{"Fishing crews share one lake fishery. Fish left in the lake breed back between seasons.", "fishing crews",
        "tonnes of fish", "haul"},
       {"Logging companies share one forest. Trees left standing regrow between seasons.", "logging companies",
        "tonnes of timber", "fell"}},
      // Survivor
      {{"Cowboys face off in a dusty frontier town, each with a revolver and a few lives to lose.", "cowboys",
        "bullets", "shoot"},
       {"Pirate captains circle each other at sea, each ship with a few hull points to lose.", "pirate captains",
        "cannonballs", "fire on"}},
      // HUPI
      {{"Collectors place sealed bids at an auction where only a bid nobody else matched counts.", "collectors",
        "bid", "bid"},
       {"Players each write a secret number on a ticket; only a number nobody else wrote counts.", "players",
        "number", "write"}},
  };
  return table[game_index(kind)][framing == Framing::A ? 0 : 1];
}

std::string rules_text(GameKind kind, Framing framing, const games::GameState& view, int seat,
                       std::span<const std::string> names) {
  const auto& v = vocabulary(kind, framing);
  const auto& p = view.params;
  std::ostringstream os;
  os << v.setting << "\n\n";
  os << "The " << v.players << " are " << join_names(names) << ". You are " << names[static_cast<std::size_t>(seat)]
     << ". The game lasts at most " << view.max_rounds << " rounds. Every round all " << v.players
     << " decide at the same time; nobody sees the others' choices until the round is resolved.\n";
  switch (kind) {
    case GameKind::Survivor:
      os << "Everyone starts with " << p.survivor_lives << " lives and " << p.survivor_ammo << " " << v.resource
         << ". Nobody knows how many lives or " << v.resource << " the others have left. Each round you may "
         << v.verb << " any living opponents, spending as many of your " << v.resource
         << " as you like; each one takes one life from its target. " << v.resource
         << " spent are gone for good. A player reaching 0 lives is out; two players can knock each other out in "
            "the same round. The game ends when at most one player is left, when nobody has "
         << v.resource << " left, or after the last round. A player who is knocked out scores the number of the "
            "round in which it happened (counting from 0). Players still in at the end score "
         << view.max_rounds << "; a sole survivor scores " << view.max_rounds + p.survivor_winner_bonus << ".\n";
      break;
    case GameKind::TragedyOfCommons:
      os << "The shared stock starts at " << format_number(p.tragedy_stock) << " " << v.resource
         << ". Each round every player demands an amount to " << v.verb
         << ". If the total demand fits in the stock, everyone gets what they asked for; otherwise the stock is "
            "split in proportion to the demands and nothing is left. What remains then grows by a factor of "
         << format_number(p.tragedy_regrowth) << ", up to " << format_number(p.tragedy_stock_cap)
         << ". Your score is the total you " << v.verb << " over the whole game.\n";
      break;
    case GameKind::Coalition:
      os << "There is a prize of " << format_number(p.coalition_prize) << " " << v.resource
         << ". Any player may propose a coalition: a group including itself, with a share of the prize for every "
            "member. Each player keeps at most one proposal on the table. A proposal succeeds when it has more "
            "than half of all players as members and every member endorses it in the same round, either by "
            "accepting it or by proposing the identical split. Members of the winning coalition receive their "
            "shares and the game ends. If no coalition forms by the last round, everyone gets 0.\n";
      break;
    case GameKind::Scheduler: {
      const int n = view.n;
      os << "There are " << n << " options, numbered 0 to " << n - 1
         << ". Each round every player names one option. If everyone names the same option, the game ends and "
            "each player scores their own value for it. Otherwise the choices are revealed and play continues. If "
            "no agreement is reached by the last round, everyone scores 0. Your values: ";
      for (int o = 0; o < n; ++o) os << (o ? ", " : "") << "option " << o << " = " << games::scheduler_pref(n, seat, o);
      os << ". Every player's values are a rotation of the same list, with a different favorite.\n";
      break;
    }
    case GameKind::HUPI:
      os << "Each round every player picks a whole " << v.resource << " from 1 to "
         << view.as<games::HupiState>().max_bid << ". The highest " << v.resource
         << " chosen by exactly one player wins the round and scores 1 point. If no " << v.resource
         << " is unique, nobody scores. Your score is the number of rounds you win.\n";
      break;
  }
  return os.str();
}

std::string private_state(const StageContext& ctx) {
  const auto& view = ctx.view;
  const auto seat = static_cast<std::size_t>(ctx.seat);
  const auto& v = vocabulary(ctx.game, ctx.framing);
  std::ostringstream os;
  os << "Round " << ctx.round << " of " << view.max_rounds << " (counting from 0). ";
  os << "Players still in the game: ";
  std::vector<std::string> living;
  for (int i = 0; i < view.n; ++i)
    if (view.alive[static_cast<std::size_t>(i)]) living.push_back(ctx.names[static_cast<std::size_t>(i)]);
  os << join_names(living) << ".\n";
  switch (ctx.game) {
    case GameKind::Survivor: {
      const auto& s = view.as<games::SurvivorState>();
      os << "You have " << s.lives[seat] << " lives and " << s.ammo[seat] << " " << v.resource << " left.\n";
      break;
    }
    case GameKind::TragedyOfCommons: {
      const auto& s = view.as<games::TragedyState>();
      os << "The stock now holds " << format_number(s.stock) << " " << v.resource << ". You have collected "
         << format_number(s.hauls[seat]) << " so far.\n";
      break;
    }
    case GameKind::Coalition: {
      const auto& s = view.as<games::CoalitionState>();
      if (s.standing.empty()) os << "No proposals are on the table.\n";
      for (const auto& p : s.standing) {
        os << "Proposal " << p.id << " by " << ctx.names[static_cast<std::size_t>(p.proposer)] << ":";
        for (const auto& [m, share] : p.split)
          os << " " << ctx.names[static_cast<std::size_t>(m)] << "=" << format_number(share);
        os << "\n";
      }
      break;
    }
    case GameKind::Scheduler: {
      const auto& s = view.as<games::SchedulerState>();
      for (int i = 0; i < view.n; ++i)
        if (s.last_choice[static_cast<std::size_t>(i)])
          os << ctx.names[static_cast<std::size_t>(i)] << " last named option " << *s.last_choice[static_cast<std::size_t>(i)]
             << ".\n";
      break;
    }
    case GameKind::HUPI: {
      const auto& s = view.as<games::HupiState>();
      os << "Rounds won so far:";
      for (int i = 0; i < view.n; ++i) os << " " << ctx.names[static_cast<std::size_t>(i)] << "=" << s.wins[static_cast<std::size_t>(i)];
      os << ".\n";
      break;
    }
  }
  return os.str();
}

std::string history_digest(const StageContext& ctx) {
  std::ostringstream os;
  if (ctx.history.empty()) return "This is the first round.\n";
  for (const auto& o : ctx.history) {
    os << "Round " << o.round << ":";
    for (std::size_t s = 0; s < o.actions.size(); ++s)
      if (o.actions[s])
        os << "\n  " << ctx.names[s] << ": " << grammar::render_action(*o.actions[s], ctx.names);
    if (!o.eliminated.empty()) {
      os << "\n  out:";
      for (int e : o.eliminated) os << " " << ctx.names[static_cast<std::size_t>(e)];
    }
    if (o.winner) os << "\n  winner: " << ctx.names[static_cast<std::size_t>(*o.winner)];
    if (ctx.game == GameKind::TragedyOfCommons)
      os << "\n  total taken " << format_number(o.total_hauled) << ", stock now " << format_number(o.stock_after);
    os << "\n";
    for (const auto& c : ctx.conversations) {
      if (c.round != o.round) continue;
      os << "  Your conversation with " << (c.first == ctx.self_name() ? c.second : c.first) << ":\n";
      for (const auto& m : c.messages) os << "    " << m.speaker << ": " << m.text << "\n";
    }
    if (static_cast<std::size_t>(o.round) < ctx.own_reasoning.size() && !ctx.own_reasoning[static_cast<std::size_t>(o.round)].empty())
      os << "  Your reasoning then: " << ctx.own_reasoning[static_cast<std::size_t>(o.round)] << "\n";
  }
  return os.str();
}

std::vector<llm::ChatMessage> build_prompt(const StageContext& ctx, const Task& task) {
  std::ostringstream system;
  system << rules_text(ctx.game, ctx.framing, ctx.view, ctx.seat, ctx.names) << "\n" << private_state(ctx) << "\n";
  system << "Each round has three stages. First you may talk privately with each other player in turn ("
         << ctx.messages_per_agent << " messages each, at most " << ctx.message_cap
         << " characters per message). Then you predict what each other player will do. Then you decide.\n";

  std::ostringstream user;
  user << "History so far:\n" << history_digest(ctx) << "\n";
  // This round's conversations are visible from the predict stage on.
  if (ctx.stage != Stage::Communicate)
    for (const auto& c : ctx.conversations) {
      if (c.round != ctx.round) continue;
      user << "This round you talked with " << (c.first == ctx.self_name() ? c.second : c.first) << ":\n";
      for (const auto& m : c.messages) user << "  " << m.speaker << ": " << m.text << "\n";
    }

  switch (ctx.stage) {
    case Stage::Communicate: {
      const std::string& partner = ctx.names.at(static_cast<std::size_t>(task.partner.value_or(0)));
      user << "You are in a private conversation with " << partner << ".";
      if (task.transcript.empty()) user << " You speak first.\n";
      else {
        user << " So far:\n";
        for (const auto& m : task.transcript) user << "  " << m.speaker << ": " << m.text << "\n";
      }
      user << "Write your next message to " << partner << " (plain text, at most " << ctx.message_cap
           << " characters).";
      break;
    }
    case Stage::Predict: {
      const std::string& target = ctx.names.at(static_cast<std::size_t>(task.target.value_or(0)));
      user << "Predict what " << target << " will do this round. Answer with exactly this block:\n"
           << grammar::prediction_grammar(ctx.game);
      break;
    }
    case Stage::Act:
      if (!ctx.own_predictions.empty()) {
        user << "Your predictions this round:\n";
        for (const auto& p : ctx.own_predictions)
          user << "  " << p.target << ": " << grammar::render_prediction(p.payload, ctx.names) << "\n";
      }
      user << "Think it through, then state your decision in exactly this block:\n"
           << grammar::action_grammar(ctx.game);
      break;
  }
  if (!task.correction.empty()) user << "\n\n" << task.correction;
  return {{"system", system.str()}, {"user", user.str()}};
}

}  // namespace arena::prompts
