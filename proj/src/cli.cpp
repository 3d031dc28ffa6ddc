#include "arena/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>

#include "arena/report.hpp"
#include "arena/runner.hpp"
#include "arena/svg.hpp"

namespace arena {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliError : public ArenaError {
 public:
  using ArenaError::ArenaError;
};

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CliError("cannot read " + path.string());
  std::vector<json> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw CliError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const fs::path& path, const std::vector<json>& lines) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  for (const auto& l : lines) out << l.dump() << "\n";
  if (!out) throw CliError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << "\n";
  if (!out) throw CliError("write failed: " + path.string());
}

report::Table read_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot read " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return report::parse_csv(text);
}

// Figure plus its CSV twin.
void emit_figure(const fs::path& dir, const std::string& stem, const report::Table& table, const std::string& svg,
                 std::ostream& out) {
  report::write_csv(dir / (stem + ".csv"), table);
  svg::write(dir / (stem + ".svg"), svg);
  out << "wrote " << (dir / (stem + ".svg")).string() << "\n";
}

struct Loaded {
  std::vector<MatchRecord> comm;
  std::vector<MatchRecord> nocomm;
};

Loaded load_records(const fs::path& root, std::ostream& err) {
  const fs::path dir = root / "traces";
  if (!fs::is_directory(dir)) throw CliError("no trace directory at " + dir.string());
  auto set = read_traces(dir);
  for (const auto& d : set.diagnostics) err << "warning: " << d << "\n";
  if (!set.aborted.empty()) err << "note: " << set.aborted.size() << " aborted matches ignored\n";
  Loaded l;
  for (auto& r : set.completed) (r.spec.communication_enabled ? l.comm : l.nocomm).push_back(std::move(r));
  return l;
}

ArenaConfig config_for(const fs::path& root, const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_config(explicit_path);
  const fs::path saved = root / "config.json";
  if (!fs::exists(saved)) throw CliError("no --config given and " + saved.string() + " does not exist");
  return load_config(saved);
}

// ---- run --------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string out;
  bool ablation = false;
  bool resume = false;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const ArenaConfig config = load_config(a.config);
  const fs::path root = a.out.empty() ? fs::path(config.output_dir) : fs::path(a.out);
  const CampaignPlan plan = enumerate_matches(config, a.ablation);
  for (const auto& w : plan.warnings) err << "warning: " << w << "\n";
  const AgentRegistry registry = make_registry(config);
  write_json(root / "config.json", config_to_json(config));

  CampaignOptions opts;
  opts.trace_dir = root / "traces";
  opts.parallelism = config.parallelism;
  opts.resume = a.resume;
  opts.protocol.params = config.rules;
  opts.log = [&out](const std::string& line) { out << line << "\n"; };
  const CampaignSummary s = run_campaign(plan, registry, opts);
  const json summary = summary_to_json(s);
  write_json(root / "campaign_summary.json", summary);
  out << summary.dump(2) << "\n";
  if (s.campaign_aborted) {
    err << "campaign stopped: " << s.abort_reason << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// ---- rate -------------------------------------------------------------------

struct RateArgs {
  std::string out = "arena_out";
  bool per_game = false;
  int vector_dim = 0;
  int bootstrap = 0;
  std::uint64_t seed = 0;
  bool no_parallel = false;
  bool no_comm = false;
};

int cmd_rate(const RateArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path root = a.out;
  auto loaded = load_records(root, err);
  const auto& records = a.no_comm ? loaded.nocomm : loaded.comm;
  if (records.empty()) throw CliError("no completed matches to rate");
  ratings::ExtractOptions ex;
  ex.include_parallel = !a.no_parallel;
  const auto comps = ratings::extract_comparisons(records, ex);
  const auto set = ratings::fit_elo(comps, a.per_game);
  report::write_csv(root / "ratings" / "elo.csv", report::ratings_table(set));
  write_json(root / "ratings" / "elo_fit.json", {{"comparisons", comps.size()},
                                                 {"converged", set.converged},
                                                 {"iterations", set.iterations},
                                                 {"objective", set.objective},
                                                 {"ranking", set.ranking()}});
  if (!set.converged) err << "warning: Elo fit hit the iteration cap\n";
  out << "ranking:";
  for (const auto& r : set.ranking()) out << " " << r << " (" << report::format_number(set.rating(r)) << ")";
  out << "\n";

  if (a.vector_dim > 0) {
    ratings::VectorFitOptions vo;
    vo.seed = a.seed;
    const auto vs = ratings::fit_vector_model(comps, a.vector_dim, vo);
    report::Table t{{"kind", "name", "component", "value"}, {}};
    for (const auto& [name, v] : vs.agent_vectors)
      for (std::size_t k = 0; k < v.size(); ++k)
        t.rows.push_back({"agent", name, std::to_string(k), report::format_number(v[k])});
    for (const auto& [g, v] : vs.game_vectors)
      for (std::size_t k = 0; k < v.size(); ++k)
        t.rows.push_back({"game", std::string(to_string(g)), std::to_string(k), report::format_number(v[k])});
    report::write_csv(root / "ratings" / "vector.csv", t);
  }

  if (a.bootstrap > 0) {
    const auto boot = ratings::bootstrap_ratings(records, a.bootstrap, a.seed, ex);
    report::write_csv(root / "ratings" / "bootstrap.csv", report::bootstrap_table(boot));
    report::write_csv(root / "ratings" / "bootstrap_quantiles.csv", report::bootstrap_quantile_table(boot));
    if (boot.skipped > 0) err << "warning: " << boot.skipped << " disconnected resamples skipped\n";
  }
  return kExitOk;
}

// ---- metrics ----------------------------------------------------------------

struct MetricsArgs {
  std::string out = "arena_out";
  std::string config;
  bool judge = false;
  bool second_judge = false;
};

struct Judged {
  std::vector<metrics::JudgeVerdict> verdicts;
  std::vector<metrics::DyadScore> dyads;
  int dropped = 0;
  int skipped = 0;
};

Judged run_judge(std::span<const MatchRecord> records, const metrics::JudgeFn& fn, const std::string& name) {
  Judged j;
  auto take = [&](metrics::JudgeResult r) {
    j.verdicts.insert(j.verdicts.end(), r.verdicts.begin(), r.verdicts.end());
    j.dyads.insert(j.dyads.end(), r.dyads.begin(), r.dyads.end());
    j.dropped += r.dropped;
    j.skipped += r.skipped;
  };
  for (const auto& rec : records) {
    take(metrics::judge_influence(rec, fn, name));
    take(metrics::judge_strategic(rec, fn, name, metrics::Metric::Planning));
    take(metrics::judge_strategic(rec, fn, name, metrics::Metric::Learning));
  }
  return j;
}

int cmd_metrics(const MetricsArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path root = a.out;
  auto loaded = load_records(root, err);
  std::vector<MatchRecord> records = std::move(loaded.comm);
  records.insert(records.end(), std::make_move_iterator(loaded.nocomm.begin()),
                 std::make_move_iterator(loaded.nocomm.end()));
  std::vector<metrics::DyadScore> dyads;
  int excluded = 0;
  for (const auto& r : records) {
    auto t = metrics::tom_scores(r);
    dyads.insert(dyads.end(), t.scores.begin(), t.scores.end());
    excluded += t.excluded;
  }
  std::vector<metrics::JudgeVerdict> verdicts;
  json summary = {{"matches", records.size()}, {"tom_excluded", excluded}};
  if (a.judge || a.second_judge) {
    const ArenaConfig config = config_for(root, a.config);
    if (!config.judge) throw CliError("the config has no judge binding");
    const std::string name = config.judge->model;
    Judged first = run_judge(records, metrics::llm_judge(*config.judge), name);
    verdicts = first.verdicts;
    dyads.insert(dyads.end(), first.dyads.begin(), first.dyads.end());
    summary["judge"] = {{"model", name}, {"verdicts", first.verdicts.size()}, {"dropped", first.dropped},
                        {"skipped", first.skipped}};
    if (first.dropped > 0) err << "warning: judge dropped " << first.dropped << " samples\n";
    if (a.second_judge) {
      if (!config.second_judge) throw CliError("the config has no second_judge binding");
      Judged second = run_judge(records, metrics::llm_judge(*config.second_judge), config.second_judge->model);
      std::vector<json> lines;
      for (const auto& v : second.verdicts) lines.push_back(metrics::to_json(v));
      write_jsonl(root / "metrics" / "verdicts_second.jsonl", lines);
      const auto ag = metrics::judge_agreement(first.verdicts, second.verdicts);
      report::Table t{{"n", "mad", "exact_rate", "within1_rate"},
                      {{std::to_string(ag.n), report::format_number(ag.mad), report::format_number(ag.exact_rate),
                        report::format_number(ag.within1_rate)}}};
      report::write_csv(root / "metrics" / "judge_agreement.csv", t);
      out << "judge agreement: mad " << report::format_number(ag.mad) << " over " << ag.n << " pairs\n";
    }
  }
  const auto vectors = metrics::aggregate_metrics(records, dyads, verdicts);
  std::vector<json> lines;
  for (const auto& d : dyads) lines.push_back(metrics::to_json(d));
  write_jsonl(root / "metrics" / "dyads.jsonl", lines);
  lines.clear();
  for (const auto& v : verdicts) lines.push_back(metrics::to_json(v));
  write_jsonl(root / "metrics" / "verdicts.jsonl", lines);
  lines.clear();
  for (const auto& v : vectors) lines.push_back(metrics::to_json(v));
  write_jsonl(root / "metrics" / "vectors.jsonl", lines);

  report::Table t{{"event", "agent", "game", "size", "framing", "communication"}, {}};
  for (auto m : metrics::kAllMetrics) t.header.emplace_back(metrics::to_string(m));
  for (const auto& v : vectors) {
    std::vector<std::string> row{v.event, v.agent, std::string(to_string(v.game)), std::to_string(v.size),
                                 std::string(to_string(v.framing)), v.communication ? "1" : "0"};
    for (const auto& x : v.values) row.push_back(report::format_optional(x));
    t.rows.push_back(std::move(row));
  }
  report::write_csv(root / "metrics" / "vectors.csv", t);
  summary["vectors"] = vectors.size();
  write_json(root / "metrics" / "summary.json", summary);
  out << "metric vectors: " << vectors.size() << "\n";
  return kExitOk;
}

std::vector<metrics::MetricVector> load_vectors(const fs::path& root) {
  const fs::path p = root / "metrics" / "vectors.jsonl";
  if (!fs::exists(p)) throw CliError("no metric vectors at " + p.string() + "; run `metrics` first");
  std::vector<metrics::MetricVector> out;
  for (const auto& j : read_jsonl(p)) out.push_back(metrics::metric_vector_from_json(j));
  return out;
}

// ---- predict ----------------------------------------------------------------

struct PredictArgs {
  std::string out = "arena_out";
  bool per_game = false;
  bool identity = false;
  std::string cv = "l2ao";
  int k = 4;
  std::uint64_t seed = 0;
};

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path root = a.out;
  auto loaded = load_records(root, err);
  const auto vectors = load_vectors(root);
  ratings::ExtractOptions ex;
  ex.include_parallel = false;
  std::vector<MatchRecord> records = std::move(loaded.comm);
  records.insert(records.end(), std::make_move_iterator(loaded.nocomm.begin()),
                 std::make_move_iterator(loaded.nocomm.end()));
  const auto comps = ratings::extract_comparisons(records, ex);
  const auto data = predictor::build_dataset(vectors, comps);
  if (data.rows.empty()) throw CliError("no decisive co-play comparisons with metric vectors");
  predictor::FitConfig fc;
  fc.per_game = a.per_game;
  fc.identity = a.identity;

  const auto model = predictor::fit_logistic(data, fc);
  report::write_csv(root / "predictor" / "importances.csv",
                    report::importance_table(predictor::feature_importances(model)));

  const auto rep = a.cv == "kfold" ? predictor::crossval_random_kfold(data, a.k, a.seed, fc)
                                   : predictor::crossval_leave_two_agents(data, fc);
  std::string label = a.cv;
  if (a.per_game) label += "+per_game";
  if (a.identity) label += "+identity";
  report::write_csv(root / "predictor" / "auc.csv", report::auc_table({{label, rep}}));
  if (!rep.scores.empty()) {
    try {
      report::write_csv(root / "predictor" / "roc.csv",
                        report::roc_table({{label, ratings::roc_curve(rep.scores, rep.labels)}}));
    } catch (const ArenaError& e) {
      err << "warning: no ROC curve: " << e.what() << "\n";
    }
  }
  write_json(root / "predictor" / "summary.json", {{"rows", data.rows.size()},
                                                   {"ties", data.ties},
                                                   {"dropped_missing", data.dropped_missing},
                                                   {"model", label},
                                                   {"converged", model.converged},
                                                   {"mean_auc", rep.mean_auc},
                                                   {"folds", rep.folds.size()},
                                                   {"skipped_folds", rep.skipped}});
  if (rep.skipped > 0) err << "note: " << rep.skipped << " folds skipped\n";
  out << label << " mean AUC " << report::format_number(rep.mean_auc) << " over "
      << rep.folds.size() - static_cast<std::size_t>(rep.skipped) << " folds\n";
  return kExitOk;
}

// ---- report -----------------------------------------------------------------

int cmd_report(const std::string& dir, std::ostream& out, std::ostream& err) {
  const fs::path root = dir;
  const fs::path fig = root / "figures";
  auto loaded = load_records(root, err);

  auto heat = [&](const std::vector<MatchRecord>& recs, const std::string& stem, const std::string& title) {
    const auto h = report::outperformance_heatmap(recs);
    const auto t = report::heatmap_table(h);
    emit_figure(fig, stem, t, svg::heatmap(t, "row", "column", "value", 0.0, 1.0, title), out);
  };
  if (!loaded.comm.empty()) heat(loaded.comm, "heatmap", "P(row outperforms column)");
  if (!loaded.nocomm.empty()) heat(loaded.nocomm, "heatmap_nocomm", "P(row outperforms column), no communication");

  if (fs::exists(root / "ratings" / "bootstrap.csv")) {
    const auto t = read_table(root / "ratings" / "bootstrap.csv");
    emit_figure(fig, "rating_violins", t, svg::violin(t, "Bootstrapped Elo ratings"), out);
  } else {
    err << "note: no bootstrap samples; run `rate --bootstrap N` for rating violins\n";
  }

  if (fs::exists(root / "metrics" / "vectors.jsonl")) {
    const auto vectors = load_vectors(root);
    const auto rep = report::consistency_report(vectors);
    const auto sim = report::similarity_table(rep.matrix);
    emit_figure(fig, "similarity", sim, svg::heatmap(sim, "row", "column", "value", -1.0, 1.0, "Metric similarity"),
                out);
    const auto cons = report::consistency_table(rep);
    report::write_csv(fig / "consistency_stats.csv", cons);
    std::vector<std::string> labels;
    std::vector<double> means;
    std::vector<std::optional<double>> sems;
    const std::pair<const char*, const report::Stat*> stats[] = {
        {"intra_game", &rep.intra_game},
        {"inter_game", &rep.inter_game},
        {"framing_intra", &rep.framing_intra},
        {"framing_inter", &rep.framing_inter},
        {"aggregated_framing_intra", &rep.aggregated_framing_intra},
        {"aggregated_framing_inter", &rep.aggregated_framing_inter}};
    for (const auto& [name, sp] : stats) {
      const report::Stat& s = *sp;
      if (!s.mean) {
        err << "note: " << name << " undefined (" << s.gap << ")\n";
        continue;
      }
      labels.push_back(name);
      means.push_back(*s.mean);
      sems.push_back(s.sem);
    }
    const auto bars = report::bar_table(labels, means, sems);
    emit_figure(fig, "consistency", bars, svg::bars(bars, "mean", "Intra- vs inter-agent correlation"), out);
  } else {
    err << "note: no metric vectors; run `metrics` for similarity figures\n";
  }

  if (fs::exists(root / "predictor" / "roc.csv")) {
    const auto t = read_table(root / "predictor" / "roc.csv");
    emit_figure(fig, "roc", t, svg::roc(t, "Held-out ROC"), out);
  }
  if (fs::exists(root / "predictor" / "importances.csv")) {
    const auto t = read_table(root / "predictor" / "importances.csv");
    const std::size_t cg = t.column("game"), cf = t.column("feature"), cw = t.column("weight");
    std::vector<std::string> games;
    for (const auto& r : t.rows)
      if (std::find(games.begin(), games.end(), r[cg]) == games.end()) games.push_back(r[cg]);
    for (const auto& g : games) {
      report::Table bars{{"label", "weight"}, {}};
      for (const auto& r : t.rows)
        if (r[cg] == g) bars.rows.push_back({r[cf], r[cw]});
      emit_figure(fig, "importances_" + g, bars, svg::bars(bars, "weight", "Feature weights (" + g + ")"), out);
    }
  }
  return kExitOk;
}

// ---- validate ---------------------------------------------------------------

int cmd_validate(const std::string& dir, std::ostream& out, std::ostream& err) {
  const fs::path tdir = fs::path(dir) / "traces";
  if (!fs::is_directory(tdir)) throw CliError("no trace directory at " + tdir.string());
  const auto set = read_traces(tdir);
  int bad = static_cast<int>(set.diagnostics.size());
  for (const auto& d : set.diagnostics) err << "corrupt: " << d << "\n";
  int checked = 0;
  for (const auto& rec : set.completed) {
    try {
      auto state = games::new_state(rec.spec, rec.params);
      for (const auto& round : rec.rounds) {
        std::vector<std::optional<games::GameAction>> actions(static_cast<std::size_t>(state.n));
        for (const auto& t : round.turns) {
          const int seat = rec.spec.seat_of_name(t.agent);
          if (seat < 0) throw TraceError("turn by unknown player '" + t.agent + "'");
          actions[static_cast<std::size_t>(seat)] = t.action;
        }
        auto [next, outcome] = games::apply_round(state, actions);
        if (!(outcome == round.outcome))
          throw TraceError("round " + std::to_string(round.index) + " outcome differs on replay");
        state = std::move(next);
      }
      if (!games::is_terminal(state)) throw TraceError("replay does not reach a terminal state");
      const auto rewards = games::terminal_rewards(state);
      for (std::size_t s = 0; s < rec.spec.roster.size(); ++s) {
        const auto it = rec.rewards.find(rec.spec.roster[s].name);
        if (it == rec.rewards.end() || it->second != rewards[s])
          throw TraceError("reward of " + rec.spec.roster[s].name + " differs on replay");
      }
      ++checked;
    } catch (const ArenaError& e) {
      ++bad;
      err << rec.match_id() << ": " << e.what() << "\n";
    }
  }
  out << "replayed " << checked << " of " << set.completed.size() << " completed matches; " << set.aborted.size()
      << " aborted; " << bad << " problems\n";
  return bad == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent social game arena"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "play a campaign and write traces");
  run_cmd->add_option("--config", run.config, "campaign config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "output directory (default: config output_dir)");
  run_cmd->add_flag("--ablation", run.ablation, "also play every match without communication");
  run_cmd->add_flag("--resume", run.resume, "skip matches already finished on disk");

  RateArgs rate;
  auto* rate_cmd = app.add_subcommand("rate", "fit ratings from traces");
  rate_cmd->add_option("--out", rate.out, "output directory")->capture_default_str();
  rate_cmd->add_flag("--per-game", rate.per_game, "fit per-game deviations");
  rate_cmd->add_option("--vector-dim", rate.vector_dim, "also fit the vector model with this dimension")
      ->check(CLI::NonNegativeNumber);
  rate_cmd->add_option("--bootstrap", rate.bootstrap, "bootstrap resamples over events")->check(CLI::NonNegativeNumber);
  rate_cmd->add_option("--seed", rate.seed, "seed for bootstrap and vector init");
  rate_cmd->add_flag("--no-parallel", rate.no_parallel, "co-play comparisons only");
  rate_cmd->add_flag("--no-comm", rate.no_comm, "rate the matches played without communication");

  MetricsArgs met;
  auto* met_cmd = app.add_subcommand("metrics", "compute socio-cognitive metrics");
  met_cmd->add_option("--out", met.out, "output directory")->capture_default_str();
  met_cmd->add_option("--config", met.config, "config with judge bindings (default: <out>/config.json)");
  met_cmd->add_flag("--judge", met.judge, "score influence, planning and learning with the judge");
  met_cmd->add_flag("--second-judge", met.second_judge, "rescore with second_judge and report agreement");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "fit the outcome predictor");
  pred_cmd->add_option("--out", pred.out, "output directory")->capture_default_str();
  pred_cmd->add_flag("--per-game", pred.per_game, "one weight vector per game");
  pred_cmd->add_flag("--identity", pred.identity, "add agent identity features");
  pred_cmd->add_option("--cv", pred.cv, "cross-validation scheme")
      ->check(CLI::IsMember({"l2ao", "kfold"}))
      ->capture_default_str();
  pred_cmd->add_option("--k", pred.k, "folds for kfold")->check(CLI::Range(2, 1000))->capture_default_str();
  pred_cmd->add_option("--seed", pred.seed, "fold shuffle seed");

  std::string report_dir = "arena_out";
  auto* rep_cmd = app.add_subcommand("report", "write CSV and SVG figures");
  rep_cmd->add_option("--out", report_dir, "output directory")->capture_default_str();

  std::string validate_dir = "arena_out";
  auto* val_cmd = app.add_subcommand("validate", "check trace integrity and replay rewards");
  val_cmd->add_option("--out", validate_dir, "output directory")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run, out, err);
    if (*rate_cmd) return cmd_rate(rate, out, err);
    if (*met_cmd) return cmd_metrics(met, out, err);
    if (*pred_cmd) return cmd_predict(pred, out, err);
    if (*rep_cmd) return cmd_report(report_dir, out, err);
    if (*val_cmd) return cmd_validate(validate_dir, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace arena
