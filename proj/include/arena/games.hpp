#pragma once

// Rule engines for the five games. Every function here is pure: state goes in,
// new state comes out. Players are addressed by seat index (roster position).

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "arena/core.hpp"

namespace arena::games {

// Tunable rule constants. Defaults are the arena's standard rules.
struct GameParams {
  int survivor_lives = 3;
  int survivor_ammo = 5;
  int survivor_winner_bonus = 5;
  double tragedy_stock = 100.0;
  double tragedy_regrowth = 1.5;
  double tragedy_stock_cap = 100.0;
  double coalition_prize = 100.0;
  int hupi_range_per_player = 10;

  friend bool operator==(const GameParams&, const GameParams&) = default;
};

// ---- actions -------------------------------------------------------------

// Each (target seat, ammo) entry spends that much ammo on the target. Empty = hold.
struct SurvivorAction {
  std::vector<std::pair<int, int>> attacks;
  friend bool operator==(const SurvivorAction&, const SurvivorAction&) = default;
};

struct TragedyAction {
  double extraction = 0.0;
  friend bool operator==(const TragedyAction&, const TragedyAction&) = default;
};

// Member seat -> share, sorted by seat.
using Split = std::vector<std::pair<int, double>>;

struct CoalitionAction {
  enum class Type { Propose, Accept, Pass };
  Type type = Type::Pass;
  Split split;           // Propose only
  int proposal_id = -1;  // Accept only
  friend bool operator==(const CoalitionAction&, const CoalitionAction&) = default;
};

struct SchedulerAction {
  int option = 0;
  friend bool operator==(const SchedulerAction&, const SchedulerAction&) = default;
};

struct HupiAction {
  int bid = 1;
  friend bool operator==(const HupiAction&, const HupiAction&) = default;
};

// Alternative order matches GameKind, so index() == game_index(kind).
using GameAction =
    std::variant<CoalitionAction, SchedulerAction, TragedyAction, SurvivorAction, HupiAction>;

inline GameKind kind_of(const GameAction& a) { return static_cast<GameKind>(a.index()); }

// ---- predictions ---------------------------------------------------------

enum class Stance { Propose, Accept, Pass };
std::string_view to_string(Stance s);
std::optional<Stance> parse_stance(std::string_view text);

struct CoalitionPrediction {
  Stance stance = Stance::Pass;
  friend bool operator==(const CoalitionPrediction&, const CoalitionPrediction&) = default;
};
struct SchedulerPrediction {
  int option = 0;
  friend bool operator==(const SchedulerPrediction&, const SchedulerPrediction&) = default;
};
struct TragedyPrediction {
  double extraction = 0.0;
  friend bool operator==(const TragedyPrediction&, const TragedyPrediction&) = default;
};
struct SurvivorPrediction {
  std::optional<int> target;  // nullopt = "none" (predicts a hold)
  friend bool operator==(const SurvivorPrediction&, const SurvivorPrediction&) = default;
};
struct HupiPrediction {
  int bid = 1;
  friend bool operator==(const HupiPrediction&, const HupiPrediction&) = default;
};

using PredictionPayload = std::variant<CoalitionPrediction, SchedulerPrediction,
                                       TragedyPrediction, SurvivorPrediction, HupiPrediction>;

inline GameKind kind_of(const PredictionPayload& p) { return static_cast<GameKind>(p.index()); }

// ---- state ---------------------------------------------------------------

struct Proposal {
  int id = -1;
  int proposer = -1;
  Split split;
  friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct SurvivorState {
  std::vector<int> lives;  // -1 in a redacted view: not known to the viewer
  std::vector<int> ammo;   // -1 in a redacted view
  std::vector<std::optional<int>> eliminated_round;
  friend bool operator==(const SurvivorState&, const SurvivorState&) = default;
};

struct TragedyState {
  double stock = 0.0;
  std::vector<double> hauls;  // cumulative
  friend bool operator==(const TragedyState&, const TragedyState&) = default;
};

struct CoalitionState {
  double prize = 0.0;
  std::vector<Proposal> standing;  // at most one per proposer, ordered by id
  int next_id = 0;
  std::optional<Proposal> formed;
  friend bool operator==(const CoalitionState&, const CoalitionState&) = default;
};

struct SchedulerState {
  std::vector<std::optional<int>> last_choice;
  std::optional<int> agreed;
  friend bool operator==(const SchedulerState&, const SchedulerState&) = default;
};

struct HupiState {
  int max_bid = 0;
  std::vector<int> wins;
  friend bool operator==(const HupiState&, const HupiState&) = default;
};

using StatePayload =
    std::variant<CoalitionState, SchedulerState, TragedyState, SurvivorState, HupiState>;

struct GameState {
  GameKind kind = GameKind::HUPI;
  int n = 0;
  int round = 0;  // number of completed rounds
  int max_rounds = 10;
  bool over = false;  // game-specific end condition reached
  GameParams params;
  std::vector<bool> alive;
  StatePayload payload;

  template <class T>
  const T& as() const { return std::get<T>(payload); }
  template <class T>
  T& as() { return std::get<T>(payload); }

  int living_count() const;
  friend bool operator==(const GameState&, const GameState&) = default;
};

// Public summary of one resolved round.
struct RoundOutcome {
  int round = 0;
  std::vector<std::optional<GameAction>> actions;  // as applied; nullopt for non-participants
  std::vector<int> substituted;                    // seats whose action was replaced
  std::vector<int> eliminated;                     // Survivor
  std::vector<double> gains;                       // per-seat reward earned this round
  std::optional<int> winner;                       // HUPI
  std::optional<int> formed_proposal;              // Coalition
  std::optional<int> agreed_option;                // Scheduler
  double total_hauled = 0.0;                       // Tragedy
  double stock_after = 0.0;                        // Tragedy
  bool game_over = false;
  friend bool operator==(const RoundOutcome&, const RoundOutcome&) = default;
};

// ---- operations ----------------------------------------------------------

GameState new_state(GameKind kind, int n, int max_rounds, const GameParams& params = {});
GameState new_state(const MatchSpec& spec, const GameParams& params = {});

// Nullopt when legal, otherwise a short reason.
std::optional<std::string> check_action(const GameState& state, int seat,
                                        const GameAction& action);
std::optional<std::string> check_prediction(const GameState& state, int target,
                                            const PredictionPayload& payload);

// Resolves one simultaneous round. `actions` is indexed by seat; entries for
// living seats that are missing or illegal are replaced by default_action.
std::pair<GameState, RoundOutcome> apply_round(const GameState& state,
                                               std::span<const std::optional<GameAction>> actions);

bool is_terminal(const GameState& state);

// Throws ContractViolation on a non-terminal state.
std::vector<double> terminal_rewards(const GameState& state);

double assertiveness(const GameState& state, int seat, const GameAction& action);
double prediction_score(const GameState& state, const PredictionPayload& predicted,
                        const GameAction& actual);

GameAction default_action(const GameState& state, int seat);
PredictionPayload neutral_prediction(const GameState& state, int target);

// The canonical prediction facet of an action (what a perfect prediction says).
PredictionPayload facet_of(const GameState& state, const GameAction& action);

// The viewer's picture of the state: other players' hidden resources masked.
GameState redact(const GameState& state, int viewer);

// Circulant Scheduler preferences: pref_i(j) = n - ((j - i) mod n).
int scheduler_pref(int n, int player, int option);

// Highest value chosen by exactly one bidder, as an index into `bids`.
std::optional<int> hupi_round_winner(std::span<const int> bids);

// Survivor: the largest-spend target, ties to the lowest seat.
std::optional<int> primary_target(const SurvivorAction& action);

double split_total(const Split& split);
double share_of(const Split& split, int seat);  // 0 for non-members

}  // namespace arena::games
