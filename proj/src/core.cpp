#include "arena/core.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>
#include <set>

namespace arena {

std::string_view to_string(GameKind kind) {
  switch (kind) {
    case GameKind::Coalition: return "coalition";
    case GameKind::Scheduler: return "scheduler";
    case GameKind::TragedyOfCommons: return "tragedy";
    case GameKind::Survivor: return "survivor";
    case GameKind::HUPI: return "hupi";
  }
  return "?";
}

std::string_view to_string(Framing framing) { return framing == Framing::A ? "A" : "B"; }

GameKind parse_game_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "coalition") return GameKind::Coalition;
  if (lower == "scheduler") return GameKind::Scheduler;
  if (lower == "tragedy" || lower == "tragedyofcommons" || lower == "tragedy_of_commons")
    return GameKind::TragedyOfCommons;
  if (lower == "survivor") return GameKind::Survivor;
  if (lower == "hupi") return GameKind::HUPI;
  throw ValidationError("game", "unknown game kind '" + std::string(text) + "'");
}

Framing parse_framing(std::string_view text) {
  if (text == "A" || text == "a") return Framing::A;
  if (text == "B" || text == "b") return Framing::B;
  throw ValidationError("framing", "unknown framing '" + std::string(text) + "'");
}

int MatchSpec::seat_of_name(std::string_view name) const {
  for (std::size_t i = 0; i < roster.size(); ++i)
    if (roster[i].name == name) return static_cast<int>(i);
  return -1;
}

int MatchSpec::seat_of_model(std::string_view key) const {
  for (std::size_t i = 0; i < roster.size(); ++i)
    if (roster[i].model_key == key) return static_cast<int>(i);
  return -1;
}

void MatchSpec::validate() const {
  if (size < kMinPlayers || size > kMaxPlayers)
    throw ValidationError("size", "size must be in [2,5]");
  if (static_cast<int>(roster.size()) != size)
    throw ValidationError("roster", "roster length must equal size");
  if (max_rounds < 1) throw ValidationError("max_rounds", "max_rounds must be positive");
  std::set<std::string> names, models;
  for (const auto& a : roster) {
    if (!names.insert(a.name).second)
      throw ValidationError("roster", "duplicate display name '" + a.name + "'");
    if (!models.insert(a.model_key).second)
      throw ValidationError("roster", "agent '" + a.model_key + "' seated twice");
  }
}

// splitmix64 finalizer
static std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(a) ^ (b + 0x632be59bd9b4e019ULL));
}
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return mix_seed(mix_seed(a, b, c), d);
}

std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::vector<std::string>& name_pool() {
  static const std::vector<std::string> pool = {
      "Avery",  "Blake",  "Casey",  "Dana",   "Eden",   "Finley", "Gray",   "Harper",
      "Indigo", "Jules",  "Kai",    "Lane",   "Morgan", "Noel",   "Oakley", "Parker",
      "Quinn",  "Reese",  "Sage",   "Tatum",  "Umber",  "Vale",   "Wren",   "Xen",
      "Yael",   "Zion",   "Arden",  "Bailey", "Cedar",  "Drew",   "Ellis",  "Fable",
      "Gale",   "Hollis", "Isle",   "Jesse",  "Kerry",  "Linden", "Marlo",  "Nico",
      "Onyx",   "Piper",  "Rowan",  "Skyler", "Teagan", "Vesper", "Winter", "Yarrow",
      "Alex",   "Briar",  "Cove",   "Darcy",  "Emery",  "Frost",  "Greer",  "Haven",
      "Ira",    "Jordan", "Kendal", "Lake",   "Micah",  "North",  "Ocean",  "Remy"};
  return pool;
}

std::vector<std::string> draw_display_names(int count, std::uint64_t seed) {
  const auto& pool = name_pool();
  if (count < 0 || count > static_cast<int>(pool.size()))
    throw ContractViolation("cannot draw that many display names");
  std::vector<int> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(mix_seed(seed, 0x6e616d65ULL));
  // Partial Fisher-Yates with an explicit modulo draw keeps the result
  // independent of the standard library's distribution implementation.
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) {
    auto remaining = pool.size() - static_cast<std::size_t>(i);
    auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng() % remaining);
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
    out.push_back(pool[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]);
  }
  return out;
}

}  // namespace arena
