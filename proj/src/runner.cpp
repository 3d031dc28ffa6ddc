#include "arena/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

namespace arena {
namespace {

// All k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k > n || k <= 0) return out;
  std::vector<int> c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

std::string match_id(GameKind g, int size, Framing f, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-%d%s-%05zu", std::string(to_string(g)).c_str(), size,
                std::string(to_string(f)).c_str(), index);
  return buf;
}

// Status of a finished trace file, from its last line.
std::optional<std::string> final_status(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  try {
    const auto j = Json::parse(last);
    if (j.value("type", "") != "match_result") return std::nullopt;
    return j.value("status", "");
  } catch (const Json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

CampaignPlan enumerate_matches(const ArenaConfig& config, bool ablation) {
  CampaignPlan plan;
  plan.coverage_fraction = config.coverage_fraction;
  plan.parallelism = config.parallelism;
  const int pool = static_cast<int>(config.agents.size());
  if (pool < 2) throw ValidationError("agents", "at least two agents are required");

  for (int size : config.sizes)
    if (size > pool)
      plan.warnings.push_back("size " + std::to_string(size) + " exceeds the agent pool of " +
                              std::to_string(pool) + "; skipped");

  std::vector<MatchSpec> all;
  for (GameKind g : config.games)
    for (int size : config.sizes) {
      if (size > pool) continue;
      const auto rosters = combinations(pool, size);
      for (Framing f : config.framings)
        for (const auto& combo : rosters)
          for (int rep = 0; rep < config.repeats; ++rep) {
            const std::size_t index = all.size();
            MatchSpec s;
            s.match_id = match_id(g, size, f, index);
            s.game = g;
            s.size = size;
            s.framing = f;
            s.communication_enabled = config.communication;
            s.max_rounds = config.max_rounds;
            s.seed = mix_seed(config.seed, index);
            std::vector<int> seating = combo;
            std::mt19937_64 rng(s.seed);
            for (std::size_t i = seating.size(); i > 1; --i) std::swap(seating[i - 1], seating[rng() % i]);
            const auto names = draw_display_names(size, mix_seed(s.seed, 0x4E414D45u));
            for (int i = 0; i < size; ++i)
              s.roster.push_back({names[static_cast<std::size_t>(i)],
                                  config.agents[static_cast<std::size_t>(seating[static_cast<std::size_t>(i)])].name});
            all.push_back(std::move(s));
          }
    }

  const auto keep = static_cast<std::size_t>(std::floor(static_cast<double>(all.size()) * config.coverage_fraction + 1e-9));
  std::vector<std::size_t> idx(all.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (keep < all.size()) {
    std::mt19937_64 rng(mix_seed(config.seed, 0x5EEDu));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
  }
  for (std::size_t i : idx) plan.matches.push_back(all[i]);

  if (ablation && config.communication) {
    const std::size_t n = plan.matches.size();
    for (std::size_t i = 0; i < n; ++i) {
      MatchSpec copy = plan.matches[i];
      copy.match_id += "-nc";
      copy.communication_enabled = false;
      plan.matches.push_back(std::move(copy));
    }
  }
  return plan;
}

nlohmann::json summary_to_json(const CampaignSummary& s) {
  return nlohmann::json{{"planned", s.planned},
                        {"completed", s.completed},
                        {"aborted", s.aborted},
                        {"skipped", s.skipped},
                        {"flagged_turns", s.flagged_turns},
                        {"flagged_predictions", s.flagged_predictions},
                        {"failed_messages", s.failed_messages},
                        {"campaign_aborted", s.campaign_aborted},
                        {"abort_reason", s.abort_reason},
                        {"aborted_ids", s.aborted_ids}};
}

CampaignSummary run_campaign(const CampaignPlan& plan, const AgentRegistry& agents, const CampaignOptions& options,
                             std::vector<MatchRecord>* records) {
  CampaignSummary summary;
  summary.planned = static_cast<int>(plan.matches.size());
  for (const auto& spec : plan.matches)
    for (const auto& a : spec.roster)
      if (!agents.count(a.model_key)) throw ValidationError("agents", "no agent registered as '" + a.model_key + "'");

  std::error_code ec;
  std::filesystem::create_directories(options.trace_dir, ec);
  if (ec) {
    summary.campaign_aborted = true;
    summary.abort_reason = "cannot create " + options.trace_dir.string() + ": " + ec.message();
    return summary;
  }

  std::vector<std::optional<MatchRecord>> results(plan.matches.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plan.matches.size()) return;
      const MatchSpec& spec = plan.matches[i];
      const auto final_path = options.trace_dir / trace_file_name(spec.match_id);
      auto part_path = final_path;
      part_path += ".part";

      if (options.resume && final_status(final_path) == std::optional<std::string>("completed")) {
        std::lock_guard lock(mu);
        ++summary.skipped;
        if (records) {
          try {
            results[i] = read_trace_file(final_path);
          } catch (const std::exception&) {
          }
        }
        continue;
      }

      std::vector<AgentPtr> seats;
      for (const auto& a : spec.roster) seats.push_back(agents.at(a.model_key));

      std::unique_ptr<JsonlFileSink> sink;
      try {
        sink = std::make_unique<JsonlFileSink>(part_path);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        summary.campaign_aborted = true;
        summary.abort_reason = e.what();
        stop = true;
        return;
      }
      MatchRecord rec = run_match(spec, seats, sink.get(), options.protocol);
      sink.reset();
      std::filesystem::rename(part_path, final_path, ec);
      if (ec && rec.status == MatchStatus::Completed) {
        rec.status = MatchStatus::Aborted;
        rec.abort_reason = "rename failed: " + ec.message();
      }

      std::lock_guard lock(mu);
      if (rec.status == MatchStatus::Completed) ++summary.completed;
      else {
        ++summary.aborted;
        summary.aborted_ids.push_back(spec.match_id);
      }
      for (const auto& r : rec.rounds) {
        for (const auto& t : r.turns) summary.flagged_turns += t.flagged;
        for (const auto& p : r.predictions) summary.flagged_predictions += p.flagged;
        for (const auto& c : r.conversations)
          for (const auto& m : c.messages) summary.failed_messages += m.failed;
      }
      if (options.log)
        options.log(spec.match_id + (rec.status == MatchStatus::Completed ? " completed" : " aborted: " + rec.abort_reason));
      if (records) results[i] = std::move(rec);
    }
  };

  const int threads = std::max(1, std::min<int>(options.parallelism, static_cast<int>(plan.matches.size())));
  if (threads == 1) worker();
  else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::sort(summary.aborted_ids.begin(), summary.aborted_ids.end());
  if (records)
    for (auto& r : results)
      if (r) records->push_back(std::move(*r));
  return summary;
}

ParallelKey parallel_key(const MatchSpec& spec, const std::string& focal, bool match_framing) {
  ParallelKey key;
  key.game = spec.game;
  key.size = spec.size;
  if (match_framing) key.framing = spec.framing;
  key.communication = spec.communication_enabled;
  bool found = false;
  for (const auto& a : spec.roster) {
    if (!found && a.model_key == focal) {
      found = true;
      continue;
    }
    key.opponents.push_back(a.model_key);
  }
  if (!found) throw ContractViolation("focal agent '" + focal + "' is not in " + spec.match_id);
  std::sort(key.opponents.begin(), key.opponents.end());
  return key;
}

}  // namespace arena
