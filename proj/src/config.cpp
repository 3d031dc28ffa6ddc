#include "arena/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "arena/trace.hpp"

namespace arena {
namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

template <class T>
T get_as(const Json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const Json::exception&) {
    throw ValidationError(key, "wrong type");
  }
}

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

LlmConfig llm_config_from_json(const Json& j, const std::string& key) {
  if (!j.is_object()) throw ValidationError(key, "must be an object");
  reject_unknown(j, {"base_url", "model", "api_key_env", "timeout_s", "max_retries", "temperature",
                     "backoff_base_s"},
                 key);
  LlmConfig c;
  if (j.contains("base_url")) c.base_url = get_as<std::string>(j["base_url"], key + ".base_url");
  if (j.contains("model")) c.model = get_as<std::string>(j["model"], key + ".model");
  if (j.contains("api_key_env")) c.api_key_env = get_as<std::string>(j["api_key_env"], key + ".api_key_env");
  if (j.contains("timeout_s")) c.timeout_s = get_as<int>(j["timeout_s"], key + ".timeout_s");
  if (j.contains("max_retries")) c.max_retries = get_as<int>(j["max_retries"], key + ".max_retries");
  if (j.contains("temperature")) c.temperature = get_as<double>(j["temperature"], key + ".temperature");
  if (j.contains("backoff_base_s")) c.backoff_base_s = get_as<double>(j["backoff_base_s"], key + ".backoff_base_s");
  if (c.timeout_s <= 0) throw ValidationError(key + ".timeout_s", "timeout must be positive");
  if (c.max_retries < 0) throw ValidationError(key + ".max_retries", "retries must be non-negative");
  if (c.backoff_base_s < 0) throw ValidationError(key + ".backoff_base_s", "must be non-negative");
  return c;
}

Json llm_config_to_json(const LlmConfig& c) {
  return Json{{"base_url", c.base_url},       {"model", c.model},
              {"api_key_env", c.api_key_env}, {"timeout_s", c.timeout_s},
              {"max_retries", c.max_retries}, {"temperature", c.temperature},
              {"backoff_base_s", c.backoff_base_s}};
}

ArenaConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("<root>", "configuration must be a JSON object");
  reject_unknown(j,
                 {"agents", "games", "sizes", "framings", "communication", "max_rounds", "seed",
                  "coverage_fraction", "output_dir", "llm", "judge", "second_judge", "repeats",
                  "parallelism", "parallel_match_framing", "rules"},
                 "");
  ArenaConfig c;
  if (!j.contains("agents") || !j["agents"].is_array() || j["agents"].empty())
    throw ValidationError("agents", "at least one agent is required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < j["agents"].size(); ++i) {
    const Json& a = j["agents"][i];
    const std::string key = "agents[" + std::to_string(i) + "]";
    if (!a.is_object()) throw ValidationError(key, "must be an object");
    reject_unknown(a, {"name", "kind", "params"}, key);
    AgentConfig ac;
    if (!a.contains("name")) throw ValidationError(key + ".name", "missing");
    ac.name = get_as<std::string>(a["name"], key + ".name");
    if (ac.name.empty()) throw ValidationError(key + ".name", "must not be empty");
    if (!names.insert(ac.name).second) throw ValidationError(key + ".name", "duplicate agent name");
    ac.kind = a.contains("kind") ? get_as<std::string>(a["kind"], key + ".kind") : "scripted";
    if (ac.kind != "scripted" && ac.kind != "llm")
      throw ValidationError(key + ".kind", "kind must be \"scripted\" or \"llm\"");
    if (a.contains("params")) {
      if (!a["params"].is_object()) throw ValidationError(key + ".params", "must be an object");
      ac.params = a["params"];
    }
    c.agents.push_back(std::move(ac));
  }
  if (j.contains("games")) {
    c.games.clear();
    for (const auto& g : j["games"]) c.games.push_back(parse_game_kind(get_as<std::string>(g, "games")));
    if (c.games.empty()) throw ValidationError("games", "at least one game is required");
  }
  if (j.contains("sizes")) {
    c.sizes = get_as<std::vector<int>>(j["sizes"], "sizes");
    if (c.sizes.empty()) throw ValidationError("sizes", "at least one size is required");
  }
  for (int s : c.sizes)
    if (s < kMinPlayers || s > kMaxPlayers) throw ValidationError("sizes", "size must be in [2,5]");
  if (j.contains("framings")) {
    c.framings.clear();
    for (const auto& f : j["framings"]) c.framings.push_back(parse_framing(get_as<std::string>(f, "framings")));
    if (c.framings.empty()) throw ValidationError("framings", "at least one framing is required");
  }
  if (j.contains("communication")) c.communication = get_as<bool>(j["communication"], "communication");
  if (j.contains("max_rounds")) c.max_rounds = get_as<int>(j["max_rounds"], "max_rounds");
  if (c.max_rounds < 1) throw ValidationError("max_rounds", "max_rounds must be positive");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("coverage_fraction"))
    c.coverage_fraction = get_as<double>(j["coverage_fraction"], "coverage_fraction");
  if (!(c.coverage_fraction > 0.0 && c.coverage_fraction <= 1.0))
    throw ValidationError("coverage_fraction", "coverage_fraction must be in (0,1]");
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j["output_dir"], "output_dir");
  if (j.contains("llm")) c.llm = llm_config_from_json(j["llm"], "llm");
  if (j.contains("judge")) c.judge = llm_config_from_json(j["judge"], "judge");
  if (j.contains("second_judge")) c.second_judge = llm_config_from_json(j["second_judge"], "second_judge");
  if (j.contains("repeats")) c.repeats = get_as<int>(j["repeats"], "repeats");
  if (c.repeats < 1) throw ValidationError("repeats", "repeats must be positive");
  if (j.contains("parallelism")) c.parallelism = get_as<int>(j["parallelism"], "parallelism");
  if (c.parallelism < 1) throw ValidationError("parallelism", "parallelism must be positive");
  if (j.contains("parallel_match_framing"))
    c.parallel_match_framing = get_as<bool>(j["parallel_match_framing"], "parallel_match_framing");
  if (j.contains("rules")) {
    Json merged = params_to_json(c.rules);
    const Json& r = j["rules"];
    if (!r.is_object()) throw ValidationError("rules", "must be an object");
    reject_unknown(r, [&] {
      std::set<std::string> keys;
      for (auto it = merged.begin(); it != merged.end(); ++it) keys.insert(it.key());
      return keys;
    }(), "rules");
    merged.update(r);
    try {
      c.rules = params_from_json(merged);
    } catch (const Json::exception&) {
      throw ValidationError("rules", "wrong type");
    }
  }
  for (const auto& a : c.agents)
    if (a.kind == "llm" && !c.llm && !a.params.contains("model"))
      throw ValidationError("llm", "llm agents need an llm section or a params.model");
  return c;
}

Json config_to_json(const ArenaConfig& c) {
  Json agents = Json::array();
  for (const auto& a : c.agents) agents.push_back(Json{{"name", a.name}, {"kind", a.kind}, {"params", a.params}});
  Json games = Json::array();
  for (auto g : c.games) games.push_back(std::string(to_string(g)));
  Json framings = Json::array();
  for (auto f : c.framings) framings.push_back(std::string(to_string(f)));
  Json j{{"agents", agents},
         {"games", games},
         {"sizes", c.sizes},
         {"framings", framings},
         {"communication", c.communication},
         {"max_rounds", c.max_rounds},
         {"seed", c.seed},
         {"coverage_fraction", c.coverage_fraction},
         {"output_dir", c.output_dir},
         {"repeats", c.repeats},
         {"parallelism", c.parallelism},
         {"parallel_match_framing", c.parallel_match_framing},
         {"rules", params_to_json(c.rules)}};
  if (c.llm) j["llm"] = llm_config_to_json(*c.llm);
  if (c.judge) j["judge"] = llm_config_to_json(*c.judge);
  if (c.second_judge) j["second_judge"] = llm_config_to_json(*c.second_judge);
  return j;
}

ArenaConfig parse_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("configuration parse error at " + line_context(text, e.byte > 0 ? e.byte - 1 : 0) +
                      ": " + e.what());
  }
  return config_from_json(j);
}

ArenaConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace arena
