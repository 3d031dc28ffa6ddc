#include "arena/ratings.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "arena/optim.hpp"
#include "arena/runner.hpp"

namespace arena::ratings {
namespace {

const double kLogitPerPoint = std::log(10.0) / kEloScale;

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Comparisons folded into (a, b, game) cells; a < b as agent indices.
struct Cell {
  int a = 0;
  int b = 0;
  int game = 0;
  double n = 0.0;
  double wins = 0.0;  // total outcome credited to a
};

struct Aggregate {
  std::vector<std::string> agents;
  std::vector<Cell> cells;
  std::set<int> games;
  double total = 0.0;
};

Aggregate aggregate(std::span<const PairwiseComparison> comps) {
  Aggregate agg;
  std::set<std::string> names;
  for (const auto& c : comps) {
    names.insert(c.i);
    names.insert(c.j);
  }
  agg.agents.assign(names.begin(), names.end());
  auto index = [&](const std::string& s) {
    return static_cast<int>(std::lower_bound(agg.agents.begin(), agg.agents.end(), s) - agg.agents.begin());
  };
  std::map<std::tuple<int, int, int>, Cell> cells;
  for (const auto& c : comps) {
    int a = index(c.i), b = index(c.j);
    double y = c.outcome;
    if (a == b) continue;
    if (a > b) {
      std::swap(a, b);
      y = 1.0 - y;
    }
    const int g = game_index(c.game);
    auto& cell = cells[{a, b, g}];
    cell.a = a;
    cell.b = b;
    cell.game = g;
    cell.n += 1.0;
    cell.wins += y;
    agg.games.insert(g);
    agg.total += 1.0;
  }
  for (auto& [k, v] : cells) agg.cells.push_back(v);
  return agg;
}

void require_connected(std::span<const PairwiseComparison> comps) {
  const auto comp = components(comps);
  if (comp.empty()) throw RatingError("no comparisons to fit");
  if (comp.size() > 1) {
    std::string msg = "comparison graph is disconnected:";
    for (const auto& c : comp) {
      msg += " {";
      for (std::size_t i = 0; i < c.size(); ++i) msg += (i ? "," : "") + c[i];
      msg += "}";
    }
    throw RatingError(msg);
  }
}

}  // namespace

// ---- comparisons -------------------------------------------------------------

std::vector<PairwiseComparison> extract_comparisons(std::span<const MatchRecord> records, const ExtractOptions& options) {
  std::vector<PairwiseComparison> out;
  for (const auto& r : records) {
    if (r.status != MatchStatus::Completed) continue;
    std::vector<std::pair<std::string, double>> by_model;
    for (const auto& a : r.spec.roster) by_model.emplace_back(a.model_key, r.rewards.at(a.name));
    std::sort(by_model.begin(), by_model.end());
    for (std::size_t x = 0; x < by_model.size(); ++x)
      for (std::size_t y = x + 1; y < by_model.size(); ++y) {
        PairwiseComparison c;
        c.i = by_model[x].first;
        c.j = by_model[y].first;
        c.game = r.spec.game;
        c.size = r.spec.size;
        const double ri = by_model[x].second, rj = by_model[y].second;
        c.outcome = ri > rj ? 1.0 : ri < rj ? 0.0 : 0.5;
        c.source = Source::Coplay;
        c.event_i = c.event_j = r.match_id();
        out.push_back(std::move(c));
      }
  }
  if (!options.include_parallel) return out;

  struct Entry {
    std::size_t event;
    std::string focal;
    double reward;
  };
  std::map<ParallelKey, std::vector<Entry>> groups;
  for (std::size_t e = 0; e < records.size(); ++e) {
    const auto& r = records[e];
    if (r.status != MatchStatus::Completed) continue;
    for (const auto& a : r.spec.roster)
      groups[parallel_key(r.spec, a.model_key, options.match_framing)].push_back({e, a.model_key, r.rewards.at(a.name)});
  }
  for (const auto& [key, entries] : groups)
    for (std::size_t x = 0; x < entries.size(); ++x)
      for (std::size_t y = x + 1; y < entries.size(); ++y) {
        const Entry& p = entries[x];
        const Entry& q = entries[y];
        if (p.event == q.event || p.focal == q.focal) continue;
        PairwiseComparison c;
        c.i = p.focal;
        c.j = q.focal;
        c.game = key.game;
        c.size = key.size;
        c.outcome = p.reward > q.reward ? 1.0 : p.reward < q.reward ? 0.0 : 0.5;
        c.source = Source::Parallel;
        c.event_i = records[p.event].match_id();
        c.event_j = records[q.event].match_id();
        out.push_back(std::move(c));
      }
  return out;
}

double elo_prob(double wi, double wj) {
  // The favourite's side is computed directly (p >= 0.5) so that 1 - p is
  // exact and elo_prob(a, b) + elo_prob(b, a) == 1 holds bit for bit.
  if (wi < wj) return 1.0 - elo_prob(wj, wi);
  return 1.0 / (1.0 + std::pow(10.0, (wj - wi) / kEloScale));
}

std::vector<std::vector<std::string>> components(std::span<const PairwiseComparison> comps) {
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> find = [&](const std::string& s) -> std::string {
    auto& p = parent[s];
    if (p.empty() || p == s) {
      p = s;
      return s;
    }
    p = find(p);
    return p;
  };
  for (const auto& c : comps) {
    const auto a = find(c.i), b = find(c.j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& [name, p] : parent) groups[find(name)].push_back(name);
  std::vector<std::vector<std::string>> out;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  return out;
}

// ---- Elo ----------------------------------------------------------------------

double EloRatingSet::rating(const std::string& agent, GameKind game) const {
  const auto it = per_game.find({agent, game});
  return global.at(agent) + (it == per_game.end() ? 0.0 : it->second);
}

double EloRatingSet::prob(const std::string& i, const std::string& j, std::optional<GameKind> game) const {
  if (game && !per_game.empty()) return elo_prob(rating(i, *game), rating(j, *game));
  return elo_prob(global.at(i), global.at(j));
}

std::vector<std::string> EloRatingSet::ranking() const {
  std::vector<std::string> r = agents;
  std::stable_sort(r.begin(), r.end(), [&](const auto& a, const auto& b) { return global.at(a) > global.at(b); });
  return r;
}

std::vector<std::string> EloRatingSet::ranking(GameKind game) const {
  std::vector<std::string> r = agents;
  std::stable_sort(r.begin(), r.end(),
                   [&](const auto& a, const auto& b) { return rating(a, game) > rating(b, game); });
  return r;
}

EloRatingSet fit_elo(std::span<const PairwiseComparison> comparisons, bool per_game, const FitOptions& options) {
  require_connected(comparisons);
  const Aggregate agg = aggregate(comparisons);
  const int A = static_cast<int>(agg.agents.size());
  const int K = kNumGames;
  const std::size_t dim = static_cast<std::size_t>(A) + (per_game ? static_cast<std::size_t>(A * K) : 0);
  const double lambda = options.deviation_l2 * agg.total;
  const double bound = kEloClip * kLogitPerPoint;
  auto dev = [&](int a, int k) { return static_cast<std::size_t>(A + a * K + k); };

  auto eval = [&](const std::vector<double>& x, std::vector<double>* grad) {
    double f = 0.0;
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
    for (const auto& c : agg.cells) {
      double z = x[static_cast<std::size_t>(c.a)] - x[static_cast<std::size_t>(c.b)];
      if (per_game) z += x[dev(c.a, c.game)] - x[dev(c.b, c.game)];
      f += c.n * softplus(z) - c.wins * z;
      if (grad) {
        const double d = c.n * sigmoid(z) - c.wins;
        (*grad)[static_cast<std::size_t>(c.a)] += d;
        (*grad)[static_cast<std::size_t>(c.b)] -= d;
        if (per_game) {
          (*grad)[dev(c.a, c.game)] += d;
          (*grad)[dev(c.b, c.game)] -= d;
        }
      }
    }
    if (per_game)
      for (std::size_t i = static_cast<std::size_t>(A); i < x.size(); ++i) {
        f += lambda * x[i] * x[i];
        if (grad) (*grad)[i] += 2.0 * lambda * x[i];
      }
    return f;
  };
  auto project = [&](std::vector<double>& x) {
    double mean = 0.0;
    for (int a = 0; a < A; ++a) mean += x[static_cast<std::size_t>(a)];
    mean /= A;
    for (int a = 0; a < A; ++a) x[static_cast<std::size_t>(a)] = std::clamp(x[static_cast<std::size_t>(a)] - mean, -bound, bound);
  };
  auto stationarity = [&](const std::vector<double>& x, const std::vector<double>& g) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double gi = g[i];
      if (i < static_cast<std::size_t>(A)) {
        if (x[i] >= bound - 1e-12 && gi < 0) gi = 0;
        if (x[i] <= -bound + 1e-12 && gi > 0) gi = 0;
      }
      worst = std::max(worst, std::abs(gi));
    }
    return worst;
  };

  std::vector<double> degree(static_cast<std::size_t>(A), 0.0);
  for (const auto& c : agg.cells) {
    degree[static_cast<std::size_t>(c.a)] += c.n;
    degree[static_cast<std::size_t>(c.b)] += c.n;
  }
  const double step = 1.0 / (0.5 * *std::max_element(degree.begin(), degree.end()) + 2.0 * lambda);

  EloRatingSet out;
  const optim::Optimum opt = optim::minimize(eval, project, stationarity, std::vector<double>(dim, 0.0), step, options.tolerance,
                               options.max_iterations, options.record_objective ? &out.objective_trace : nullptr);
  out.agents = agg.agents;
  out.converged = opt.converged;
  out.iterations = opt.iterations;
  out.objective = opt.f;

  std::vector<double> w(opt.x.begin(), opt.x.begin() + A);
  if (per_game)
    for (int a = 0; a < A; ++a) {
      double mean = 0.0;
      for (int k : agg.games) mean += opt.x[dev(a, k)];
      mean /= static_cast<double>(agg.games.size());
      w[static_cast<std::size_t>(a)] += mean;
      for (int k : agg.games)
        out.per_game[{agg.agents[static_cast<std::size_t>(a)], static_cast<GameKind>(k)}] =
            (opt.x[dev(a, k)] - mean) / kLogitPerPoint;
    }
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / A;
  for (int a = 0; a < A; ++a)
    out.global[agg.agents[static_cast<std::size_t>(a)]] = kEloPrior + (w[static_cast<std::size_t>(a)] - mean) / kLogitPerPoint;
  return out;
}

// ---- vector model -----------------------------------------------------------

double VectorRatingSet::prob(const std::string& i, const std::string& j, GameKind game) const {
  const auto& wi = agent_vectors.at(i);
  const auto& wj = agent_vectors.at(j);
  const auto& g = game_vectors.at(game);
  double z = 0.0;
  for (int d = 0; d < dim; ++d)
    z += (wi[static_cast<std::size_t>(d)] - wj[static_cast<std::size_t>(d)]) * g[static_cast<std::size_t>(d)];
  return sigmoid(z);
}

VectorRatingSet fit_vector_model(std::span<const PairwiseComparison> comparisons, int dim,
                                 const VectorFitOptions& options) {
  if (dim < 1 || dim > 7) throw ContractViolation("vector dimension must be in [1,7]");
  require_connected(comparisons);
  const Aggregate agg = aggregate(comparisons);
  const int A = static_cast<int>(agg.agents.size());
  const int K = kNumGames;
  const auto D = static_cast<std::size_t>(dim);
  auto w = [&](int a) { return static_cast<std::size_t>(a) * D; };
  auto g = [&](int k) { return static_cast<std::size_t>(A + k) * D; };
  const double inv_n = 1.0 / agg.total;

  auto eval = [&](const std::vector<double>& x, std::vector<double>* grad) {
    double f = 0.0;
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
    for (const auto& c : agg.cells) {
      double z = 0.0;
      for (std::size_t d = 0; d < D; ++d) z += (x[w(c.a) + d] - x[w(c.b) + d]) * x[g(c.game) + d];
      f += (c.n * softplus(z) - c.wins * z) * inv_n;
      if (grad) {
        const double dz = (c.n * sigmoid(z) - c.wins) * inv_n;
        for (std::size_t d = 0; d < D; ++d) {
          (*grad)[w(c.a) + d] += dz * x[g(c.game) + d];
          (*grad)[w(c.b) + d] -= dz * x[g(c.game) + d];
          (*grad)[g(c.game) + d] += dz * (x[w(c.a) + d] - x[w(c.b) + d]);
        }
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      f += options.l2 * x[i] * x[i];
      if (grad) (*grad)[i] += 2.0 * options.l2 * x[i];
    }
    return f;
  };
  auto stationarity = [](const std::vector<double>&, const std::vector<double>& gr) {
    double worst = 0.0;
    for (double v : gr) worst = std::max(worst, std::abs(v));
    return worst;
  };

  std::mt19937_64 rng(options.seed);
  auto unit = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  std::vector<double> x(static_cast<std::size_t>(A + K) * D);
  for (std::size_t i = 0; i < x.size(); i += 2) {
    const double r = std::sqrt(-2.0 * std::log(unit())), t = 2.0 * M_PI * unit();
    x[i] = options.init_sd * r * std::cos(t);
    if (i + 1 < x.size()) x[i + 1] = options.init_sd * r * std::sin(t);
  }
  const optim::Optimum opt =
      optim::minimize(eval, [](std::vector<double>&) {}, stationarity, x, 1.0, options.tolerance, options.max_iterations, nullptr);

  VectorRatingSet out;
  out.dim = dim;
  out.converged = opt.converged;
  out.iterations = opt.iterations;
  for (int a = 0; a < A; ++a)
    out.agent_vectors[agg.agents[static_cast<std::size_t>(a)]] =
        std::vector<double>(opt.x.begin() + static_cast<std::ptrdiff_t>(w(a)), opt.x.begin() + static_cast<std::ptrdiff_t>(w(a) + D));
  for (int k = 0; k < K; ++k)
    out.game_vectors[static_cast<GameKind>(k)] =
        std::vector<double>(opt.x.begin() + static_cast<std::ptrdiff_t>(g(k)), opt.x.begin() + static_cast<std::ptrdiff_t>(g(k) + D));
  return out;
}

// ---- evaluation -------------------------------------------------------------

double kendall_tau(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw ContractViolation("kendall_tau: rankings differ in length");
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < b.size(); ++i) pos[b[i]] = i;
  if (pos.size() != b.size()) throw ContractViolation("kendall_tau: duplicate element");
  std::vector<std::size_t> mapped;
  for (const auto& x : a) {
    const auto it = pos.find(x);
    if (it == pos.end()) throw ContractViolation("kendall_tau: element sets differ");
    mapped.push_back(it->second);
  }
  const std::size_t n = a.size();
  if (n < 2) throw ContractViolation("kendall_tau: need at least two elements");
  long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) (mapped[i] < mapped[j] ? concordant : discordant) += 1;
  return static_cast<double>(concordant - discordant) / static_cast<double>(n * (n - 1) / 2);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ContractViolation("roc_auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return scores[x] < scores[y]; });
  double rank_sum = 0.0;
  double pos = 0, neg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        rank_sum += midrank;
        ++pos;
      } else {
        ++neg;
      }
    }
    i = j;
  }
  if (pos == 0 || neg == 0) throw RatingError("roc_auc: both classes must be present");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return scores[x] > scores[y]; });
  double pos = 0, neg = 0;
  for (int l : labels) (l ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw RatingError("roc_curve: both classes must be present");
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? tp : fp) += 1;
      ++j;
    }
    pts.emplace_back(fp / neg, tp / pos);
    i = j;
  }
  return pts;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractViolation("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BootstrapResult bootstrap_ratings(std::span<const MatchRecord> records, int n_resamples, std::uint64_t seed,
                                  const ExtractOptions& extract, const FitOptions& fit) {
  if (n_resamples < 1) throw ContractViolation("bootstrap needs at least one resample");
  std::vector<const MatchRecord*> events;
  for (const auto& r : records)
    if (r.status == MatchStatus::Completed) events.push_back(&r);
  if (events.empty()) throw RatingError("no completed events to resample");

  BootstrapResult out;
  out.requested = n_resamples;
  {
    std::set<std::string> all;
    for (const auto* r : events)
      for (const auto& a : r->spec.roster) all.insert(a.model_key);
    out.agents.assign(all.begin(), all.end());
  }
  std::vector<MatchRecord> sample;
  for (int rep = 0; rep < n_resamples; ++rep) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(rep)));
    sample.clear();
    for (std::size_t e = 0; e < events.size(); ++e) sample.push_back(*events[rng() % events.size()]);
    // Duplicated events are distinct draws; give them distinct ids so the
    // parallel extraction sees separate events.
    for (std::size_t e = 0; e < sample.size(); ++e) sample[e].spec.match_id += "#" + std::to_string(e);
    const auto comps = extract_comparisons(sample, extract);
    try {
      const auto fitted = fit_elo(comps, false, fit);
      if (fitted.agents.size() != out.agents.size()) {
        ++out.skipped;
        continue;
      }
      for (const auto& a : out.agents) out.samples[a].push_back(fitted.global.at(a));
    } catch (const RatingError&) {
      ++out.skipped;
    }
  }
  for (const auto& a : out.agents) {
    auto& q = out.quantiles[a];
    if (out.samples[a].empty()) continue;
    for (double p : kBootstrapQuantiles) q.push_back(quantile(out.samples[a], p));
  }
  return out;
}

CvResult crossval(std::span<const PairwiseComparison> comparisons, Model model, int folds, std::uint64_t seed, int dim) {
  if (folds < 2) throw ContractViolation("cross-validation needs at least two folds");
  std::vector<std::size_t> order(comparisons.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  CvResult out;
  for (int f = 0; f < folds; ++f) {
    std::vector<PairwiseComparison> train, test;
    for (std::size_t p = 0; p < order.size(); ++p)
      (static_cast<int>(p % static_cast<std::size_t>(folds)) == f ? test : train).push_back(comparisons[order[p]]);
    std::vector<double> scores;
    std::vector<int> labels;
    try {
      std::function<double(const PairwiseComparison&)> score;
      EloRatingSet elo;
      VectorRatingSet vec;
      if (model == Model::Vector) {
        VectorFitOptions vo;
        vo.seed = mix_seed(seed, static_cast<std::uint64_t>(f));
        vec = fit_vector_model(train, dim, vo);
        score = [&](const PairwiseComparison& c) { return vec.prob(c.i, c.j, c.game); };
      } else {
        elo = fit_elo(train, model == Model::EloPerGame);
        score = [&](const PairwiseComparison& c) { return elo.prob(c.i, c.j, c.game); };
      }
      for (const auto& c : test) {
        if (c.outcome == 0.5) continue;
        double s;
        try {
          s = score(c);
        } catch (const std::out_of_range&) {
          continue;  // agent absent from the training fold
        }
        scores.push_back(s);
        labels.push_back(c.outcome > 0.5 ? 1 : 0);
      }
      out.fold_auc.push_back(roc_auc(scores, labels));
      out.scores.insert(out.scores.end(), scores.begin(), scores.end());
      out.labels.insert(out.labels.end(), labels.begin(), labels.end());
    } catch (const RatingError&) {
      ++out.skipped_folds;
    }
  }
  if (!out.fold_auc.empty())
    out.mean_auc = std::accumulate(out.fold_auc.begin(), out.fold_auc.end(), 0.0) / static_cast<double>(out.fold_auc.size());
  return out;
}

}  // namespace arena::ratings
