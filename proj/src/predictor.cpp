#include "arena/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "arena/optim.hpp"

namespace arena::predictor {
namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Dataset build_dataset(std::span<const metrics::MetricVector> vectors,
                      std::span<const ratings::PairwiseComparison> comparisons) {
  std::map<std::pair<std::string, std::string>, const metrics::MetricVector*> index;
  for (const auto& v : vectors) index[{v.event, v.agent}] = &v;
  Dataset d;
  std::set<std::string> agents;
  for (const auto& c : comparisons) {
    if (c.source != ratings::Source::Coplay) {
      ++d.parallel_excluded;
      continue;
    }
    if (c.outcome == 0.5) {
      ++d.ties;
      continue;
    }
    const auto a = index.find({c.event_i, c.i});
    const auto b = index.find({c.event_i, c.j});
    if (a == index.end() || b == index.end()) {
      ++d.dropped_missing;
      continue;
    }
    Row r;
    r.i = c.i;
    r.j = c.j;
    r.event = c.event_i;
    r.game = c.game;
    r.label = c.outcome > 0.5 ? 1 : 0;
    r.m_i = a->second->values;
    r.m_j = b->second->values;
    agents.insert(r.i);
    agents.insert(r.j);
    d.rows.push_back(std::move(r));
  }
  d.agents.assign(agents.begin(), agents.end());
  return d;
}

Standardizer Standardizer::fit(const Dataset& data, std::span<const std::size_t> rows) {
  Standardizer s;
  for (std::size_t m = 0; m < metrics::kNumMetrics; ++m) {
    double sum = 0.0, sq = 0.0, n = 0.0;
    auto take = [&](const MetricValues& v) {
      if (!v[m]) return;
      sum += *v[m];
      sq += *v[m] * *v[m];
      n += 1.0;
    };
    for (std::size_t r : rows) {
      take(data.rows[r].m_i);
      take(data.rows[r].m_j);
    }
    s.mean[m] = n > 0 ? sum / n : 0.0;
    const double var = n > 0 ? std::max(0.0, sq / n - s.mean[m] * s.mean[m]) : 0.0;
    s.sd[m] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  return s;
}

std::vector<std::string> feature_names(const FitConfig& config, std::span<const std::string> agents) {
  std::vector<std::string> names;
  for (auto m : metrics::kAllMetrics) names.emplace_back(metrics::to_string(m));
  for (auto m : metrics::kAllMetrics) names.push_back("missing_" + std::string(metrics::to_string(m)));
  if (config.identity)
    for (const auto& a : agents) names.push_back("id_" + a);
  return names;
}

std::vector<double> Model::features(const Row& row) const {
  std::vector<double> x;
  x.reserve(kBaseFeatures + (config.identity ? agents.size() : 0));
  auto z = [&](const MetricValues& v, std::size_t m) {
    return v[m] ? (*v[m] - standardizer.mean[m]) / standardizer.sd[m] : 0.0;
  };
  for (std::size_t m = 0; m < metrics::kNumMetrics; ++m) x.push_back(z(row.m_i, m) - z(row.m_j, m));
  for (std::size_t m = 0; m < metrics::kNumMetrics; ++m)
    x.push_back(static_cast<double>(!row.m_i[m].has_value()) - static_cast<double>(!row.m_j[m].has_value()));
  if (config.identity)
    for (const auto& a : agents) x.push_back(static_cast<double>(a == row.i) - static_cast<double>(a == row.j));
  return x;
}

const std::vector<double>& Model::weights(GameKind game) const {
  return config.per_game ? by_game.at(game) : fixed;
}

double Model::score(const Row& row) const {
  const auto x = features(row);
  const auto& w = weights(row.game);
  return std::inner_product(x.begin(), x.end(), w.begin(), 0.0);
}

LogisticFit fit_weights(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double l2,
                        double tolerance, int max_iterations) {
  if (x.size() != y.size()) throw ContractViolation("fit_weights: feature and label counts differ");
  LogisticFit out;
  const std::size_t dim = x.empty() ? 0 : x.front().size();
  if (x.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(x.size());
  auto eval = [&](const std::vector<double>& w, std::vector<double>* grad) {
    double f = 0.0;
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
    for (std::size_t r = 0; r < x.size(); ++r) {
      const double z = std::inner_product(x[r].begin(), x[r].end(), w.begin(), 0.0);
      f += (softplus(z) - y[r] * z) * inv_n;
      if (grad) {
        const double d = (sigmoid(z) - y[r]) * inv_n;
        for (std::size_t k = 0; k < dim; ++k) (*grad)[k] += d * x[r][k];
      }
    }
    for (std::size_t k = 0; k < dim; ++k) {
      f += l2 * w[k] * w[k];
      if (grad) (*grad)[k] += 2.0 * l2 * w[k];
    }
    return f;
  };
  const auto opt = optim::minimize(eval, [](std::vector<double>&) {}, optim::max_abs_gradient,
                                   std::vector<double>(dim, 0.0), 1.0, tolerance, max_iterations);
  out.w = opt.x;
  out.converged = opt.converged;
  out.iterations = opt.iterations;
  return out;
}

Model fit_logistic(const Dataset& data, const FitConfig& config, std::span<const std::size_t> rows) {
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(data.rows.size());
    std::iota(all.begin(), all.end(), 0);
    rows = all;
  }
  Model m;
  m.config = config;
  m.agents = data.agents;
  m.standardizer = Standardizer::fit(data, rows);
  const std::size_t dim = kBaseFeatures + (config.identity ? data.agents.size() : 0);

  auto fit_subset = [&](const std::vector<std::size_t>& subset) {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (std::size_t r : subset) {
      x.push_back(m.features(data.rows[r]));
      y.push_back(data.rows[r].label);
    }
    if (x.empty()) return std::vector<double>(dim, 0.0);
    auto fit = fit_weights(x, y, config.l2, config.tolerance, config.max_iterations);
    m.converged = m.converged && fit.converged;
    return fit.w;
  };

  if (!config.per_game) {
    m.fixed = fit_subset(std::vector<std::size_t>(rows.begin(), rows.end()));
  } else {
    for (GameKind g : kAllGames) {
      std::vector<std::size_t> subset;
      for (std::size_t r : rows)
        if (data.rows[r].game == g) subset.push_back(r);
      m.by_game[g] = fit_subset(subset);
    }
  }
  return m;
}

std::vector<Fold> leave_two_agents_folds(const Dataset& data) {
  std::vector<Fold> folds;
  const auto& A = data.agents;
  for (std::size_t a = 0; a < A.size(); ++a)
    for (std::size_t b = a + 1; b < A.size(); ++b) {
      Fold f;
      f.label = A[a] + "|" + A[b];
      for (std::size_t r = 0; r < data.rows.size(); ++r) {
        const auto& row = data.rows[r];
        const bool held = row.i == A[a] || row.i == A[b] || row.j == A[a] || row.j == A[b];
        (held ? f.test : f.train).push_back(r);
      }
      folds.push_back(std::move(f));
    }
  return folds;
}

std::vector<Fold> event_kfold_folds(const Dataset& data, int k, std::uint64_t seed) {
  if (k < 2) throw ContractViolation("k-fold needs k >= 2");
  std::set<std::string> event_set;
  for (const auto& r : data.rows) event_set.insert(r.event);
  std::vector<std::string> events(event_set.begin(), event_set.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = events.size(); i > 1; --i) std::swap(events[i - 1], events[rng() % i]);
  std::map<std::string, int> fold_of;
  for (std::size_t p = 0; p < events.size(); ++p) fold_of[events[p]] = static_cast<int>(p % static_cast<std::size_t>(k));
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) folds[static_cast<std::size_t>(f)].label = "fold " + std::to_string(f);
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const int f = fold_of[data.rows[r].event];
    for (int g = 0; g < k; ++g) (g == f ? folds[static_cast<std::size_t>(g)].test : folds[static_cast<std::size_t>(g)].train).push_back(r);
  }
  return folds;
}

CvReport crossval(const Dataset& data, std::vector<Fold> folds, const FitConfig& config) {
  CvReport out;
  double sum = 0.0;
  for (auto& f : folds) {
    std::vector<double> scores;
    std::vector<int> labels;
    if (f.test.empty()) f.skip_reason = "empty test fold";
    else if (f.train.empty()) f.skip_reason = "empty training fold";
    else {
      const Model m = fit_logistic(data, config, f.train);
      for (std::size_t r : f.test) {
        scores.push_back(m.score(data.rows[r]));
        labels.push_back(data.rows[r].label);
      }
      try {
        f.auc = ratings::roc_auc(scores, labels);
      } catch (const ratings::RatingError&) {
        f.skip_reason = "test fold has a single class";
      }
    }
    if (f.auc) {
      sum += *f.auc;
      out.scores.insert(out.scores.end(), scores.begin(), scores.end());
      out.labels.insert(out.labels.end(), labels.begin(), labels.end());
    } else {
      ++out.skipped;
    }
    out.folds.push_back(std::move(f));
  }
  const int used = static_cast<int>(out.folds.size()) - out.skipped;
  out.mean_auc = used > 0 ? sum / used : 0.0;
  return out;
}

CvReport crossval_leave_two_agents(const Dataset& data, const FitConfig& config) {
  if (data.agents.size() < 3) throw ContractViolation("leave-two-agents-out needs at least three agents");
  return crossval(data, leave_two_agents_folds(data), config);
}

CvReport crossval_random_kfold(const Dataset& data, int k, std::uint64_t seed, const FitConfig& config) {
  return crossval(data, event_kfold_folds(data, k, seed), config);
}

std::vector<Importance> rank_weights(std::span<const std::string> names, std::span<const double> weights) {
  std::vector<Importance> out;
  for (std::size_t i = 0; i < names.size() && i < weights.size(); ++i) out.push_back({names[i], weights[i]});
  std::stable_sort(out.begin(), out.end(),
                   [](const Importance& a, const Importance& b) { return std::abs(a.weight) > std::abs(b.weight); });
  return out;
}

std::map<std::optional<GameKind>, std::vector<Importance>> feature_importances(const Model& model) {
  const auto names = feature_names(model.config, model.agents);
  std::map<std::optional<GameKind>, std::vector<Importance>> out;
  if (!model.config.per_game) out[std::nullopt] = rank_weights(names, model.fixed);
  else
    for (const auto& [g, w] : model.by_game) out[g] = rank_weights(names, w);
  return out;
}

}  // namespace arena::predictor
