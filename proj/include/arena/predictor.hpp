#pragma once

// Zero-intercept logistic models of pairwise outcomes on metric differences.
//
// Features for a comparison (i, j): z(m_i) - z(m_j) over the seven metrics,
// where z standardizes with training-fold statistics and imputes absent values
// at 0; then miss(i) - miss(j) per metric; then, optionally, onehot(i) -
// onehot(j). Every block is a difference, so the score of (j, i) is exactly
// the negative of the score of (i, j).

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arena/metrics.hpp"
#include "arena/ratings.hpp"

namespace arena::predictor {

inline constexpr int kMetricFeatures = metrics::kNumMetrics;
inline constexpr int kBaseFeatures = 2 * metrics::kNumMetrics;

using MetricValues = std::array<std::optional<double>, metrics::kNumMetrics>;

struct Row {
  std::string i;
  std::string j;
  std::string event;
  GameKind game = GameKind::HUPI;
  int label = 0;  // 1 when i beat j
  MetricValues m_i{};
  MetricValues m_j{};
};

struct Dataset {
  std::vector<Row> rows;
  std::vector<std::string> agents;  // sorted; identity block order
  int ties = 0;
  int dropped_missing = 0;  // no MetricVector for one side
  int parallel_excluded = 0;
};

Dataset build_dataset(std::span<const metrics::MetricVector> vectors,
                      std::span<const ratings::PairwiseComparison> comparisons);

struct Standardizer {
  std::array<double, metrics::kNumMetrics> mean{};
  std::array<double, metrics::kNumMetrics> sd{};

  // Statistics over the metric vectors of both sides of the given rows.
  static Standardizer fit(const Dataset& data, std::span<const std::size_t> rows);
};

struct FitConfig {
  bool per_game = false;
  bool identity = false;
  double l2 = 1e-2;
  double tolerance = 1e-8;
  int max_iterations = 100000;
};

std::vector<std::string> feature_names(const FitConfig& config, std::span<const std::string> agents);

struct Model {
  FitConfig config;
  Standardizer standardizer;
  std::vector<std::string> agents;
  std::vector<double> fixed;                       // when !per_game
  std::map<GameKind, std::vector<double>> by_game;  // when per_game
  bool converged = true;

  std::vector<double> features(const Row& row) const;
  const std::vector<double>& weights(GameKind game) const;
  double score(const Row& row) const;  // logit of P(i beats j)
};

// Fits on the given rows (all rows when `rows` is empty).
Model fit_logistic(const Dataset& data, const FitConfig& config, std::span<const std::size_t> rows = {});

// Plain zero-intercept L2 logistic regression: minimizes the mean log loss
// plus l2 * |w|^2.
struct LogisticFit {
  std::vector<double> w;
  bool converged = false;
  int iterations = 0;
};
LogisticFit fit_weights(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double l2,
                        double tolerance = 1e-8, int max_iterations = 100000);

struct Fold {
  std::string label;  // "a|b" held-out agents, or "fold k"
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::optional<double> auc;  // absent when the fold was skipped
  std::string skip_reason;
};

struct CvReport {
  std::vector<Fold> folds;
  double mean_auc = 0.0;
  int skipped = 0;
  std::vector<double> scores;  // pooled held-out scores
  std::vector<int> labels;
};

// One fold per unordered pair of agents: train on rows involving neither,
// test on rows involving either.
std::vector<Fold> leave_two_agents_folds(const Dataset& data);
// Events (not rows) are dealt to k folds after a seeded shuffle.
std::vector<Fold> event_kfold_folds(const Dataset& data, int k, std::uint64_t seed);

CvReport crossval(const Dataset& data, std::vector<Fold> folds, const FitConfig& config);
CvReport crossval_leave_two_agents(const Dataset& data, const FitConfig& config);
CvReport crossval_random_kfold(const Dataset& data, int k, std::uint64_t seed, const FitConfig& config);

struct Importance {
  std::string feature;
  double weight = 0.0;
};

// Weights ranked by magnitude, signs kept. One list per game when per-game.
std::vector<Importance> rank_weights(std::span<const std::string> names, std::span<const double> weights);
std::map<std::optional<GameKind>, std::vector<Importance>> feature_importances(const Model& model);

}  // namespace arena::predictor
