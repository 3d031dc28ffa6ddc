#include "arena/protocol.hpp"

#include <algorithm>
#include <random>

namespace arena {
namespace {

struct MatchLoop {
  const MatchSpec& spec;
  std::span<const AgentPtr> seats;
  TraceSink* sink;
  const ProtocolOptions& opt;

  MatchRecord record;
  games::GameState state;
  std::vector<std::string> names;
  std::vector<games::RoundOutcome> history;
  std::vector<std::vector<ConversationRecord>> convs;   // per seat, all rounds
  std::vector<std::vector<std::string>> reasoning;      // per seat, one entry per round

  void emit(const Json& line) {
    if (sink) sink->append(line);
  }

  StageContext context(int seat, Stage stage) const {
    StageContext c;
    c.match_id = spec.match_id;
    c.game = spec.game;
    c.framing = spec.framing;
    c.seat = seat;
    c.round = state.round;
    c.stage = stage;
    c.names = names;
    c.view = games::redact(state, seat);
    c.history = history;
    for (const auto& conv : convs[static_cast<std::size_t>(seat)])
      if (stage != Stage::Communicate || conv.round < state.round) c.conversations.push_back(conv);
    c.own_reasoning = reasoning[static_cast<std::size_t>(seat)];
    c.message_cap = opt.message_cap;
    c.messages_per_agent = opt.messages_per_agent;
    c.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(seat), static_cast<std::uint64_t>(state.round),
                      static_cast<std::uint64_t>(stage));
    return c;
  }

  std::vector<int> living() const {
    std::vector<int> out;
    for (int i = 0; i < state.n; ++i)
      if (state.alive[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
  }

  ConversationRecord converse(int a, int b, std::mt19937_64& rng) {
    ConversationRecord rec;
    rec.round = state.round;
    rec.first = names[static_cast<std::size_t>(std::min(a, b))];
    rec.second = names[static_cast<std::size_t>(std::max(a, b))];
    int speaker = (rng() & 1) ? b : a;
    const StageContext ctx_a = context(a, Stage::Communicate);
    const StageContext ctx_b = context(b, Stage::Communicate);
    for (int turn = 0; turn < 2 * opt.messages_per_agent; ++turn) {
      const int partner = speaker == a ? b : a;
      Message m;
      m.speaker = names[static_cast<std::size_t>(speaker)];
      try {
        MessageReply r = seats[static_cast<std::size_t>(speaker)]->converse(speaker == a ? ctx_a : ctx_b, partner,
                                                                            rec.messages);
        m.failed = r.failed;
        m.text = r.failed ? std::string() : std::move(r.text);
      } catch (const std::exception&) {
        m.failed = true;
      }
      m.text = truncate_utf8(std::move(m.text), static_cast<std::size_t>(opt.message_cap), &m.truncated);
      rec.messages.push_back(std::move(m));
      speaker = partner;
    }
    return rec;
  }

  void play_round(RoundRecord& rr) {
    const auto alive = living();

    if (spec.communication_enabled && alive.size() >= 2) {
      std::vector<std::pair<int, int>> pairs;
      for (std::size_t x = 0; x < alive.size(); ++x)
        for (std::size_t y = x + 1; y < alive.size(); ++y) pairs.emplace_back(alive[x], alive[y]);
      std::mt19937_64 rng(mix_seed(spec.seed, 0xC0FFEEu, static_cast<std::uint64_t>(state.round)));
      for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[rng() % i]);
      // Every conversation sees only earlier rounds; the results are shared
      // with the participants once all of them are over.
      for (const auto& [a, b] : pairs) rr.conversations.push_back(converse(a, b, rng));
      for (const auto& c : rr.conversations) {
        convs[static_cast<std::size_t>(spec.seat_of_name(c.first))].push_back(c);
        convs[static_cast<std::size_t>(spec.seat_of_name(c.second))].push_back(c);
      }
    }

    std::vector<std::vector<PredictionRecord>> own(static_cast<std::size_t>(state.n));
    for (int p : alive) {
      const StageContext ctx = context(p, Stage::Predict);
      for (int t : alive) {
        if (t == p) continue;
        PredictionRecord pr;
        pr.predictor = names[static_cast<std::size_t>(p)];
        pr.target = names[static_cast<std::size_t>(t)];
        std::optional<games::PredictionPayload> payload;
        try {
          payload = seats[static_cast<std::size_t>(p)]->predict(ctx, t).payload;
        } catch (const std::exception&) {
        }
        if (payload && !games::check_prediction(state, t, *payload)) pr.payload = *payload;
        else {
          pr.payload = games::neutral_prediction(state, t);
          pr.flagged = true;
        }
        own[static_cast<std::size_t>(p)].push_back(pr);
        rr.predictions.push_back(std::move(pr));
      }
    }

    std::vector<int> order = opt.collection_order;
    if (order.empty())
      for (int i = 0; i < state.n; ++i) order.push_back(i);
    std::vector<std::optional<games::GameAction>> actions(static_cast<std::size_t>(state.n));
    std::vector<TurnRecord> turns(static_cast<std::size_t>(state.n));
    for (int s : order) {
      if (!state.alive[static_cast<std::size_t>(s)]) continue;
      StageContext ctx = context(s, Stage::Act);
      ctx.own_predictions = own[static_cast<std::size_t>(s)];
      TurnRecord& t = turns[static_cast<std::size_t>(s)];
      t.agent = names[static_cast<std::size_t>(s)];
      ActionBlock block;
      try {
        block = seats[static_cast<std::size_t>(s)]->act(ctx);
      } catch (const std::exception& e) {
        block.failed = true;
        block.error = e.what();
      }
      t.reasoning = std::move(block.reasoning);
      std::optional<std::string> illegal;
      if (block.action) illegal = games::check_action(state, s, *block.action);
      if (block.action && !illegal) {
        t.action = *block.action;
      } else {
        t.action = games::default_action(state, s);
        t.flagged = true;
        t.flag_reason = block.failed ? "agent failure: " + block.error
                        : illegal    ? "illegal action: " + *illegal
                                     : "unparseable action: " + block.error;
      }
      actions[static_cast<std::size_t>(s)] = t.action;
    }
    for (int s : alive) rr.turns.push_back(std::move(turns[static_cast<std::size_t>(s)]));
    for (int s = 0; s < state.n; ++s) {
      const auto& seat_turn = std::find_if(rr.turns.begin(), rr.turns.end(),
                                           [&](const TurnRecord& t) { return t.agent == names[static_cast<std::size_t>(s)]; });
      reasoning[static_cast<std::size_t>(s)].push_back(seat_turn == rr.turns.end() ? std::string() : seat_turn->reasoning);
    }

    auto [next, outcome] = games::apply_round(state, actions);
    state = std::move(next);
    rr.outcome = outcome;
    history.push_back(std::move(outcome));
  }

  void emit_round(const RoundRecord& rr) {
    for (const auto& c : rr.conversations)
      for (std::size_t i = 0; i < c.messages.size(); ++i)
        emit(trace_line::conversation_turn(spec.match_id, rr.index, c, static_cast<int>(i)));
    for (const auto& p : rr.predictions) emit(trace_line::prediction(spec.match_id, rr.index, p));
    for (const auto& t : rr.turns) emit(trace_line::reasoning(spec.match_id, rr.index, t));
    for (const auto& t : rr.turns) emit(trace_line::action(spec.match_id, rr.index, t));
    emit(trace_line::round_result(spec.match_id, rr.outcome));
  }

  MatchRecord run() {
    record.spec = spec;
    record.params = opt.params;
    try {
      spec.validate();
      if (seats.size() != spec.roster.size()) throw ContractViolation("one agent per roster seat required");
      state = games::new_state(spec, opt.params);
      for (const auto& a : spec.roster) names.push_back(a.name);
      convs.resize(names.size());
      reasoning.resize(names.size());
      emit(trace_line::match_header(spec, opt.params));
      while (!games::is_terminal(state)) {
        RoundRecord rr;
        rr.index = state.round;
        play_round(rr);
        emit_round(rr);
        record.rounds.push_back(std::move(rr));
      }
      const auto rewards = games::terminal_rewards(state);
      for (std::size_t i = 0; i < names.size(); ++i) record.rewards[names[i]] = rewards[i];
      record.status = MatchStatus::Completed;
      emit(trace_line::match_result(record));
      if (sink) sink->flush();
    } catch (const std::exception& e) {
      record.status = MatchStatus::Aborted;
      record.abort_reason = e.what();
      record.rewards.clear();
      try {
        emit(trace_line::match_result(record));
        if (sink) sink->flush();
      } catch (const std::exception&) {
      }
    }
    return std::move(record);
  }
};

}  // namespace

std::string truncate_utf8(std::string text, std::size_t cap, bool* truncated) {
  if (truncated) *truncated = false;
  if (text.size() <= cap) return text;
  std::size_t cut = cap;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  text.resize(cut);
  if (truncated) *truncated = true;
  return text;
}

MatchRecord run_match(const MatchSpec& spec, std::span<const AgentPtr> seats, TraceSink* sink,
                      const ProtocolOptions& options) {
  MatchLoop loop{spec, seats, sink, options, {}, {}, {}, {}, {}, {}};
  return loop.run();
}

}  // namespace arena
