#include "arena/llm.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "httplib.h"

#include "arena/grammar.hpp"
#include "arena/prompts.hpp"

namespace arena::llm {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

void backoff(const LlmConfig& binding, int attempt) {
  thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
  const double delay = binding.backoff_base_s * std::pow(2.0, attempt);
  const double jitter = delay * 0.25 * static_cast<double>(jitter_rng() >> 11) * 0x1.0p-53;
  std::this_thread::sleep_for(std::chrono::duration<double>(delay + jitter));
}

}  // namespace

std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw LlmError("base_url needs a scheme: " + base_url, true);
  auto path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string path = base_url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {base_url.substr(0, path_start), path};
}

std::string complete(const LlmConfig& binding, const std::vector<ChatMessage>& messages,
                     std::optional<double> temperature) {
  const auto [host, prefix] = split_base_url(binding.base_url);
  httplib::Headers headers;
  if (!binding.api_key_env.empty()) {
    const char* key = std::getenv(binding.api_key_env.c_str());
    if (!key || !*key) throw LlmError("environment variable " + binding.api_key_env + " is not set", true);
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  nlohmann::json body{{"model", binding.model}, {"temperature", temperature.value_or(binding.temperature)}};
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const std::string payload = body.dump();

  httplib::Client client(host);
  client.set_connection_timeout(binding.timeout_s, 0);
  client.set_read_timeout(binding.timeout_s, 0);
  client.set_write_timeout(binding.timeout_s, 0);

  std::string last_error;
  int last_status = 0;
  for (int attempt = 0; attempt <= binding.max_retries; ++attempt) {
    if (attempt > 0) backoff(binding, attempt - 1);
    auto res = client.Post(prefix + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      last_status = 0;
      continue;
    }
    last_status = res->status;
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) throw LlmError("HTTP " + std::to_string(res->status) + " from " + host, true, res->status);
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw LlmError(std::string("malformed completion response: ") + e.what(), true, res->status);
    }
  }
  throw LlmError("gave up after " + std::to_string(binding.max_retries + 1) + " attempts: " + last_error, false,
                 last_status);
}

MessageReply LlmAgent::converse(const StageContext& ctx, int partner, std::span<const Message> transcript) const {
  prompts::Task task;
  task.partner = partner;
  task.transcript = transcript;
  try {
    return {trim(complete(binding_, prompts::build_prompt(ctx, task))), false};
  } catch (const LlmError&) {
    return {"", true};
  }
}

PredictionReply LlmAgent::predict(const StageContext& ctx, int target) const {
  prompts::Task task;
  task.target = target;
  PredictionReply reply;
  try {
    for (int attempt = 0; attempt < 2; ++attempt) {
      reply.raw = complete(binding_, prompts::build_prompt(ctx, task));
      std::string error;
      auto payload = grammar::parse_prediction(reply.raw, ctx.game, ctx.names, &error);
      if (payload) {
        if (auto bad = games::check_prediction(ctx.view, target, *payload)) error = *bad;
        else {
          reply.payload = std::move(payload);
          return reply;
        }
      }
      task.correction = "Your previous answer could not be used (" + error + "). Reply again with exactly one "
                        "```prediction block in the required format.";
    }
  } catch (const LlmError&) {
    reply.failed = true;
  }
  return reply;
}

ActionBlock LlmAgent::act(const StageContext& ctx) const {
  prompts::Task task;
  ActionBlock out;
  try {
    for (int attempt = 0; attempt < 2; ++attempt) {
      const std::string text = complete(binding_, prompts::build_prompt(ctx, task));
      out.reasoning = grammar::strip_block(text, "action");
      std::string error;
      auto action = grammar::parse_action(text, ctx.game, ctx.names, &error);
      if (action) {
        if (auto bad = games::check_action(ctx.view, ctx.seat, *action)) error = *bad;
        else {
          out.action = std::move(action);
          out.error.clear();
          return out;
        }
      }
      out.error = error;
      task.correction = "Your previous action was rejected (" + error + "). Reply again with your reasoning and "
                        "exactly one legal ```action block.";
    }
  } catch (const LlmError& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace arena::llm
