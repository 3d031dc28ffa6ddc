#pragma once

// Identifiers and records shared by every part of the arena.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace arena {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kMinPlayers = 2;
inline constexpr int kMaxPlayers = 5;

// Errors. Everything the library throws derives from ArenaError.
class ArenaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConfigError : public ArenaError {
 public:
  using ArenaError::ArenaError;
};
class ValidationError : public ArenaError {
 public:
  ValidationError(std::string key, const std::string& what)
      : ArenaError(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};
class ContractViolation : public ArenaError {
 public:
  using ArenaError::ArenaError;
};
class TraceError : public ArenaError {
 public:
  using ArenaError::ArenaError;
};

enum class GameKind { Coalition, Scheduler, TragedyOfCommons, Survivor, HUPI };
inline constexpr GameKind kAllGames[] = {GameKind::Coalition, GameKind::Scheduler,
                                         GameKind::TragedyOfCommons, GameKind::Survivor,
                                         GameKind::HUPI};
inline constexpr int kNumGames = 5;

enum class Framing { A, B };

std::string_view to_string(GameKind kind);
std::string_view to_string(Framing framing);
GameKind parse_game_kind(std::string_view text);
Framing parse_framing(std::string_view text);
inline int game_index(GameKind kind) { return static_cast<int>(kind); }

struct AgentId {
  std::string name;       // in-game display name, unique within a match
  std::string model_key;  // configured agent this seat is played by

  friend bool operator==(const AgentId&, const AgentId&) = default;
};

struct MatchSpec {
  std::string match_id;
  GameKind game = GameKind::HUPI;
  int size = 2;
  Framing framing = Framing::A;
  std::vector<AgentId> roster;
  bool communication_enabled = true;
  int max_rounds = 10;
  std::uint64_t seed = 0;

  int seat_of_name(std::string_view name) const;   // -1 when absent
  int seat_of_model(std::string_view key) const;   // -1 when absent
  void validate() const;

  friend bool operator==(const MatchSpec&, const MatchSpec&) = default;
};

// Deterministic 64-bit mixing for deriving sub-seeds from a match seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d);
std::uint64_t hash_string(std::string_view s);

// Fixed pool of display names drawn per match.
const std::vector<std::string>& name_pool();
std::vector<std::string> draw_display_names(int count, std::uint64_t seed);

}  // namespace arena
