#pragma once

// Consistency analyses, outperformance heatmaps and the CSV tables every
// figure is drawn from.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arena/metrics.hpp"
#include "arena/predictor.hpp"
#include "arena/ratings.hpp"

namespace arena::report {

class UndefinedCorrelation : public ArenaError {
 public:
  using ArenaError::ArenaError;
};

// Sample Pearson correlation. Throws ContractViolation on unequal or short
// input and UndefinedCorrelation when either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);

struct Category {
  GameKind game = GameKind::HUPI;
  int size = 2;
  friend auto operator<=>(const Category&, const Category&) = default;
};

// The 20 game categories ordered by (game name, size).
std::vector<Category> all_categories();
std::string category_label(const Category& c);

using MetricMeans = std::array<std::optional<double>, metrics::kNumMetrics>;

// Correlation over metrics present on both sides. Absent when fewer than two
// metrics pair up or either side is constant.
std::optional<double> vector_correlation(const MetricMeans& a, const MetricMeans& b);

// Standardizes every metric across the given vectors (population sd; constant
// metrics become 0).
void zscore(std::vector<MetricMeans*>& vectors);

struct SimilarityMatrix {
  std::vector<std::string> agents;
  std::vector<Category> categories;
  std::vector<std::optional<double>> cells;  // size() x size(), row-major

  std::size_t size() const { return agents.size() * categories.size(); }
  std::size_t index(std::size_t agent, std::size_t category) const { return agent * categories.size() + category; }
  const std::optional<double>& at(std::size_t r, std::size_t c) const { return cells[r * size() + c]; }
  std::string label(std::size_t r) const;
};

// Rows are (agent, category) pairs ordered by agent then category. Each row is
// the agent's mean metric vector in that category, z-scored across rows.
SimilarityMatrix similarity_matrix(std::span<const metrics::MetricVector> vectors);

struct Stat {
  std::optional<double> mean;
  std::optional<double> sem;
  int n = 0;
  std::string gap;  // why the statistic is missing or thin
};

Stat summarize(std::span<const double> values);

struct ConsistencyReport {
  SimilarityMatrix matrix;
  // Block-diagonal (same agent) versus off-diagonal cells of the matrix. The
  // cell counts partition the matrix; the unit diagonal is counted but not
  // averaged.
  std::size_t block_cells = 0;
  std::size_t off_block_cells = 0;
  Stat block_mean;
  Stat off_block_mean;

  Stat intra_game;  // same agent, different categories
  Stat inter_game;  // different agents, same category
  Stat framing_intra;  // same agent and category, framing A vs B
  Stat framing_inter;  // different agents, same category and framing
  Stat aggregated_framing_intra;  // same agent, all games, framing A vs B
  Stat aggregated_framing_inter;  // different agents, all games, same framing
  std::map<std::string, Stat> intra_by_agent;
  std::map<std::string, std::optional<double>> aggregated_by_agent;
};

ConsistencyReport consistency_report(std::span<const metrics::MetricVector> vectors);

struct Heatmap {
  std::vector<std::string> agents;
  std::vector<std::vector<double>> wins;  // row's score against column, ties 0.5
  std::vector<std::vector<int>> counts;

  static constexpr int kMinSamples = 5;

  std::optional<double> value(std::size_t r, std::size_t c) const;
  bool flagged(std::size_t r, std::size_t c) const { return counts[r][c] < kMinSamples; }
  // max - min over populated off-diagonal cells; 0 when fewer than two.
  double spread() const;
};

Heatmap heatmap_from_comparisons(std::span<const ratings::PairwiseComparison> comparisons);
Heatmap outperformance_heatmap(std::span<const MatchRecord> records, const ratings::ExtractOptions& options = {});

// ---- tables -------------------------------------------------------------------

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws ContractViolation
};

std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

std::string to_csv(const Table& t);
Table parse_csv(std::string_view text);
void write_csv(const std::filesystem::path& path, const Table& t);

// agent,game,rating (game "global" for the scalar rating)
Table ratings_table(const ratings::EloRatingSet& set);
// agent,sample,rating (violin data)
Table bootstrap_table(const ratings::BootstrapResult& result);
// agent,q025,q25,q50,q75,q975
Table bootstrap_quantile_table(const ratings::BootstrapResult& result);
// row,column,value,count,flagged
Table heatmap_table(const Heatmap& h);
// row,column,value (value empty when undefined)
Table similarity_table(const SimilarityMatrix& m);
// label,mean,sem,n,gap
Table consistency_table(const ConsistencyReport& r);
// label,mean,sem
Table bar_table(const std::vector<std::string>& labels, const std::vector<double>& means,
                const std::vector<std::optional<double>>& sems);
// series,fpr,tpr
Table roc_table(const std::map<std::string, std::vector<std::pair<double, double>>>& curves);
// game,feature,weight
Table importance_table(const std::map<std::optional<GameKind>, std::vector<predictor::Importance>>& imp);
// model,fold,auc,skip_reason
Table auc_table(const std::map<std::string, predictor::CvReport>& reports);

}  // namespace arena::report
