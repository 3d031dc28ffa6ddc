#include "arena/agents.hpp"

#include "arena/llm.hpp"
#include "arena/scripted.hpp"

namespace arena {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Communicate: return "communicate";
    case Stage::Predict: return "predict";
    case Stage::Act: return "act";
  }
  return "?";
}

std::vector<int> StageContext::living_opponents() const {
  std::vector<int> out;
  for (int i = 0; i < view.n; ++i)
    if (i != seat && view.alive[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

int StageContext::seat_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

AgentPtr make_agent(const AgentConfig& config, const std::optional<LlmConfig>& llm) {
  if (config.kind == "scripted") return scripted::make_scripted(config.params);
  if (config.kind == "llm") {
    // Per-agent params override the shared endpoint settings field by field.
    nlohmann::json merged = llm ? llm_config_to_json(*llm) : nlohmann::json::object();
    for (auto it = config.params.begin(); it != config.params.end(); ++it) merged[it.key()] = it.value();
    LlmConfig binding = llm_config_from_json(merged, "agents." + config.name + ".params");
    if (binding.model.empty())
      throw ValidationError("agents." + config.name + ".params.model", "llm agents need a model");
    return std::make_shared<llm::LlmAgent>(std::move(binding));
  }
  throw ValidationError("agents." + config.name + ".kind", "kind must be \"scripted\" or \"llm\"");
}

AgentRegistry make_registry(const ArenaConfig& config) {
  AgentRegistry reg;
  for (const auto& a : config.agents) {
    if (reg.count(a.name)) throw ValidationError("agents." + a.name, "duplicate agent name");
    reg.emplace(a.name, make_agent(a, config.llm));
  }
  return reg;
}

}  // namespace arena
