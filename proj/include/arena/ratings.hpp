#pragma once

// Pairwise comparisons and the three rating models: a global scalar Elo, Elo
// with per-game deviations, and latent agent vectors scaled per game.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arena/records.hpp"

namespace arena::ratings {

inline constexpr double kEloPrior = 1500.0;
inline constexpr double kEloScale = 400.0;
inline constexpr double kEloClip = 800.0;

class RatingError : public ArenaError {
 public:
  using ArenaError::ArenaError;
};

enum class Source { Coplay, Parallel };

// Agents are identified by model key. outcome is 1 when i's reward beat j's,
// 0.5 on a tie.
struct PairwiseComparison {
  std::string i;
  std::string j;
  GameKind game = GameKind::HUPI;
  int size = 0;
  double outcome = 0.5;
  Source source = Source::Coplay;
  std::string event_i;  // event of i (and of j for co-play)
  std::string event_j;
  friend bool operator==(const PairwiseComparison&, const PairwiseComparison&) = default;
};

struct ExtractOptions {
  bool include_parallel = true;
  bool match_framing = true;
};

// Co-play: C(n,2) comparisons per event, i < j by model key. Parallel: one per
// (event pair, focal pair) sharing a parallel key, with i the focal of the
// earlier event.
std::vector<PairwiseComparison> extract_comparisons(std::span<const MatchRecord> records,
                                                    const ExtractOptions& options = {});

double elo_prob(double wi, double wj);

struct FitOptions {
  double deviation_l2 = 1e-3;  // times the number of comparisons
  double tolerance = 1e-8;     // on the max-abs projected gradient
  int max_iterations = 100000;
  bool record_objective = false;  // keep the objective after every accepted step
};

struct EloRatingSet {
  std::vector<std::string> agents;  // sorted
  std::map<std::string, double> global;
  std::map<std::pair<std::string, GameKind>, double> per_game;  // deviations; empty when not fitted
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  std::vector<double> objective_trace;

  double rating(const std::string& agent) const { return global.at(agent); }
  double rating(const std::string& agent, GameKind game) const;  // global + deviation
  double prob(const std::string& i, const std::string& j, std::optional<GameKind> game = std::nullopt) const;
  std::vector<std::string> ranking() const;  // best first, ties by name
  std::vector<std::string> ranking(GameKind game) const;
};

// Connected components of the comparison graph (sorted agent names each).
std::vector<std::vector<std::string>> components(std::span<const PairwiseComparison> comparisons);

// Batch maximum likelihood for the logistic rating model. Throws RatingError
// when the comparison graph is disconnected.
EloRatingSet fit_elo(std::span<const PairwiseComparison> comparisons, bool per_game, const FitOptions& options = {});

struct VectorRatingSet {
  int dim = 1;
  std::map<std::string, std::vector<double>> agent_vectors;
  std::map<GameKind, std::vector<double>> game_vectors;
  bool converged = false;
  int iterations = 0;
  double prob(const std::string& i, const std::string& j, GameKind game) const;
};

struct VectorFitOptions {
  double l2 = 1e-2;
  double init_sd = 0.1;
  std::uint64_t seed = 0;
  double tolerance = 1e-8;
  int max_iterations = 100000;
};

VectorRatingSet fit_vector_model(std::span<const PairwiseComparison> comparisons, int dim,
                                 const VectorFitOptions& options = {});

// ---- evaluation -------------------------------------------------------------

double kendall_tau(std::span<const std::string> a, std::span<const std::string> b);

// Mann-Whitney AUC with midranks. Throws RatingError unless both labels occur.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// ROC curve points (fpr, tpr) from the highest threshold down, tied scores grouped.
std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores, std::span<const int> labels);

// Type-7 sample quantile.
double quantile(std::vector<double> values, double q);

inline constexpr double kBootstrapQuantiles[] = {0.025, 0.25, 0.5, 0.75, 0.975};

struct BootstrapResult {
  std::vector<std::string> agents;
  std::map<std::string, std::vector<double>> samples;  // one rating per kept resample
  std::map<std::string, std::vector<double>> quantiles;  // at kBootstrapQuantiles
  int requested = 0;
  int skipped = 0;  // disconnected resamples
};

BootstrapResult bootstrap_ratings(std::span<const MatchRecord> records, int n_resamples, std::uint64_t seed,
                                  const ExtractOptions& extract = {}, const FitOptions& fit = {});

enum class Model { Elo, EloPerGame, Vector };

struct CvResult {
  std::vector<double> fold_auc;
  double mean_auc = 0.0;
  int skipped_folds = 0;
  std::vector<double> scores;  // pooled held-out scores and labels (ties excluded)
  std::vector<int> labels;
};

// k-fold cross-validation over comparisons with a seeded shuffle.
CvResult crossval(std::span<const PairwiseComparison> comparisons, Model model, int folds, std::uint64_t seed,
                  int dim = 1);

}  // namespace arena::ratings
