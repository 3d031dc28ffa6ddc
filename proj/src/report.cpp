#include "arena/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace arena::report {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractViolation("pearson: lengths differ");
  if (x.size() < 2) throw ContractViolation("pearson: needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx <= 1e-24 || syy <= 1e-24) throw UndefinedCorrelation("correlation undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<Category> all_categories() {
  std::vector<GameKind> games(std::begin(kAllGames), std::end(kAllGames));
  std::sort(games.begin(), games.end(), [](GameKind a, GameKind b) { return to_string(a) < to_string(b); });
  std::vector<Category> out;
  for (GameKind g : games)
    for (int n = kMinPlayers; n <= kMaxPlayers; ++n) out.push_back({g, n});
  return out;
}

std::string category_label(const Category& c) { return std::string(to_string(c.game)) + "-" + std::to_string(c.size); }

std::optional<double> vector_correlation(const MetricMeans& a, const MetricMeans& b) {
  std::vector<double> x, y;
  for (std::size_t m = 0; m < a.size(); ++m)
    if (a[m] && b[m]) {
      x.push_back(*a[m]);
      y.push_back(*b[m]);
    }
  if (x.size() < 2) return std::nullopt;
  try {
    return pearson(x, y);
  } catch (const UndefinedCorrelation&) {
    return std::nullopt;
  }
}

void zscore(std::vector<MetricMeans*>& vectors) {
  for (std::size_t m = 0; m < metrics::kNumMetrics; ++m) {
    double sum = 0.0, sq = 0.0, n = 0.0;
    for (const auto* v : vectors)
      if ((*v)[m]) {
        sum += *(*v)[m];
        sq += *(*v)[m] * *(*v)[m];
        n += 1.0;
      }
    if (n == 0) continue;
    const double mean = sum / n;
    const double var = std::max(0.0, sq / n - mean * mean);
    const double sd = std::sqrt(var);
    for (auto* v : vectors)
      if ((*v)[m]) (*v)[m] = sd > 1e-12 ? (*(*v)[m] - mean) / sd : 0.0;
  }
}

namespace {

// Mean of each metric over a group of vectors; absent when no vector has it.
template <class Key>
class MeanAccumulator {
 public:
  void add(const Key& key, const metrics::MetricVector& v) {
    auto& acc = acc_[key];
    for (std::size_t m = 0; m < metrics::kNumMetrics; ++m)
      if (v.values[m]) {
        acc.first[m] += *v.values[m];
        acc.second[m] += 1;
      }
  }

  std::map<Key, MetricMeans> means() const {
    std::map<Key, MetricMeans> out;
    for (const auto& [k, acc] : acc_) {
      MetricMeans mm{};
      for (std::size_t m = 0; m < metrics::kNumMetrics; ++m)
        if (acc.second[m] > 0) mm[m] = acc.first[m] / acc.second[m];
      out[k] = mm;
    }
    return out;
  }

 private:
  std::map<Key, std::pair<std::array<double, metrics::kNumMetrics>, std::array<int, metrics::kNumMetrics>>> acc_;
};

template <class Key>
std::map<Key, MetricMeans> standardized(std::map<Key, MetricMeans> means) {
  std::vector<MetricMeans*> ptrs;
  for (auto& [k, v] : means) ptrs.push_back(&v);
  zscore(ptrs);
  return means;
}

std::vector<std::string> agents_of(std::span<const metrics::MetricVector> vectors) {
  std::set<std::string> s;
  for (const auto& v : vectors) s.insert(v.agent);
  return {s.begin(), s.end()};
}

}  // namespace

std::string SimilarityMatrix::label(std::size_t r) const {
  const std::size_t nc = categories.size();
  return agents[r / nc] + ":" + category_label(categories[r % nc]);
}

SimilarityMatrix similarity_matrix(std::span<const metrics::MetricVector> vectors) {
  SimilarityMatrix sm;
  sm.agents = agents_of(vectors);
  sm.categories = all_categories();
  MeanAccumulator<std::pair<std::string, Category>> acc;
  for (const auto& v : vectors) acc.add({v.agent, Category{v.game, v.size}}, v);
  const auto means = standardized(acc.means());

  const std::size_t n = sm.size();
  std::vector<const MetricMeans*> rows(n, nullptr);
  for (std::size_t a = 0; a < sm.agents.size(); ++a)
    for (std::size_t c = 0; c < sm.categories.size(); ++c) {
      auto it = means.find({sm.agents[a], sm.categories[c]});
      if (it != means.end()) rows[sm.index(a, c)] = &it->second;
    }
  sm.cells.assign(n * n, std::nullopt);
  for (std::size_t r = 0; r < n; ++r) {
    if (!rows[r]) continue;
    for (std::size_t c = r; c < n; ++c) {
      if (!rows[c]) continue;
      auto v = vector_correlation(*rows[r], *rows[c]);
      if (r == c && v) v = 1.0;
      sm.cells[r * n + c] = v;
      sm.cells[c * n + r] = v;
    }
  }
  return sm;
}

Stat summarize(std::span<const double> values) {
  Stat s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) {
    s.gap = "no defined correlations";
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / s.n;
  s.mean = mean;
  if (s.n < 2) {
    s.gap = "single value, no standard error";
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  s.sem = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  return s;
}

ConsistencyReport consistency_report(std::span<const metrics::MetricVector> vectors) {
  ConsistencyReport rep;
  rep.matrix = similarity_matrix(vectors);
  const auto& sm = rep.matrix;
  const std::size_t na = sm.agents.size(), nc = sm.categories.size(), n = sm.size();

  std::vector<double> block, off;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const bool same = r / nc == c / nc;
      (same ? rep.block_cells : rep.off_block_cells)++;
      if (r == c || !sm.at(r, c)) continue;
      (same ? block : off).push_back(*sm.at(r, c));
    }
  rep.block_mean = summarize(block);
  rep.off_block_mean = summarize(off);

  std::vector<double> intra, inter;
  for (std::size_t a = 0; a < na; ++a) {
    std::vector<double> mine;
    for (std::size_t c1 = 0; c1 < nc; ++c1)
      for (std::size_t c2 = c1 + 1; c2 < nc; ++c2)
        if (const auto& v = sm.at(sm.index(a, c1), sm.index(a, c2))) mine.push_back(*v);
    intra.insert(intra.end(), mine.begin(), mine.end());
    rep.intra_by_agent[sm.agents[a]] = summarize(mine);
    for (std::size_t b = a + 1; b < na; ++b)
      for (std::size_t c = 0; c < nc; ++c)
        if (const auto& v = sm.at(sm.index(a, c), sm.index(b, c))) inter.push_back(*v);
  }
  rep.intra_game = summarize(intra);
  rep.inter_game = summarize(inter);

  // Framing split at category level.
  MeanAccumulator<std::tuple<std::string, Category, Framing>> by_framing;
  for (const auto& v : vectors) by_framing.add({v.agent, Category{v.game, v.size}, v.framing}, v);
  const auto fm = standardized(by_framing.means());
  auto find = [&](const std::string& a, const Category& c, Framing f) -> const MetricMeans* {
    auto it = fm.find({a, c, f});
    return it == fm.end() ? nullptr : &it->second;
  };
  std::vector<double> f_intra, f_inter;
  for (std::size_t a = 0; a < na; ++a)
    for (const auto& c : sm.categories) {
      const auto* x = find(sm.agents[a], c, Framing::A);
      const auto* y = find(sm.agents[a], c, Framing::B);
      if (x && y)
        if (auto v = vector_correlation(*x, *y)) f_intra.push_back(*v);
      for (std::size_t b = a + 1; b < na; ++b)
        for (Framing f : {Framing::A, Framing::B}) {
          const auto* p = find(sm.agents[a], c, f);
          const auto* q = find(sm.agents[b], c, f);
          if (p && q)
            if (auto v = vector_correlation(*p, *q)) f_inter.push_back(*v);
        }
    }
  rep.framing_intra = summarize(f_intra);
  rep.framing_inter = summarize(f_inter);

  // Framing split over all games.
  MeanAccumulator<std::pair<std::string, Framing>> agg;
  for (const auto& v : vectors) agg.add({v.agent, v.framing}, v);
  const auto am = standardized(agg.means());
  auto afind = [&](const std::string& a, Framing f) -> const MetricMeans* {
    auto it = am.find({a, f});
    return it == am.end() ? nullptr : &it->second;
  };
  std::vector<double> a_intra, a_inter;
  for (std::size_t a = 0; a < na; ++a) {
    const auto* x = afind(sm.agents[a], Framing::A);
    const auto* y = afind(sm.agents[a], Framing::B);
    std::optional<double> v;
    if (x && y) v = vector_correlation(*x, *y);
    rep.aggregated_by_agent[sm.agents[a]] = v;
    if (v) a_intra.push_back(*v);
    for (std::size_t b = a + 1; b < na; ++b)
      for (Framing f : {Framing::A, Framing::B}) {
        const auto* p = afind(sm.agents[a], f);
        const auto* q = afind(sm.agents[b], f);
        if (p && q)
          if (auto w = vector_correlation(*p, *q)) a_inter.push_back(*w);
      }
  }
  rep.aggregated_framing_intra = summarize(a_intra);
  rep.aggregated_framing_inter = summarize(a_inter);

  std::set<Category> seen;
  for (const auto& v : vectors) seen.insert({v.game, v.size});
  if (na < 2) {
    for (Stat* s : {&rep.inter_game, &rep.framing_inter, &rep.aggregated_framing_inter, &rep.off_block_mean})
      s->gap = "needs at least two agents";
  }
  if (seen.size() < 2) rep.intra_game.gap = "needs metrics in at least two game categories";
  return rep;
}

std::optional<double> Heatmap::value(std::size_t r, std::size_t c) const {
  if (counts[r][c] == 0) return std::nullopt;
  return wins[r][c] / counts[r][c];
}

double Heatmap::spread() const {
  std::optional<double> lo, hi;
  for (std::size_t r = 0; r < agents.size(); ++r)
    for (std::size_t c = 0; c < agents.size(); ++c) {
      if (r == c) continue;
      if (auto v = value(r, c)) {
        lo = lo ? std::min(*lo, *v) : *v;
        hi = hi ? std::max(*hi, *v) : *v;
      }
    }
  return lo ? *hi - *lo : 0.0;
}

Heatmap heatmap_from_comparisons(std::span<const ratings::PairwiseComparison> comparisons) {
  Heatmap h;
  std::set<std::string> s;
  for (const auto& c : comparisons) {
    s.insert(c.i);
    s.insert(c.j);
  }
  h.agents.assign(s.begin(), s.end());
  const std::size_t n = h.agents.size();
  h.wins.assign(n, std::vector<double>(n, 0.0));
  h.counts.assign(n, std::vector<int>(n, 0));
  auto idx = [&](const std::string& a) {
    return static_cast<std::size_t>(std::lower_bound(h.agents.begin(), h.agents.end(), a) - h.agents.begin());
  };
  for (const auto& c : comparisons) {
    if (c.i == c.j) continue;
    const std::size_t i = idx(c.i), j = idx(c.j);
    h.wins[i][j] += c.outcome;
    h.wins[j][i] += 1.0 - c.outcome;
    ++h.counts[i][j];
    ++h.counts[j][i];
  }
  return h;
}

Heatmap outperformance_heatmap(std::span<const MatchRecord> records, const ratings::ExtractOptions& options) {
  return heatmap_from_comparisons(ratings::extract_comparisons(records, options));
}

// ---- tables -------------------------------------------------------------------

std::size_t Table::column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  throw ContractViolation("table has no column " + std::string(name));
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out += ',';
    out += csv_field(fields[k]);
  }
  return out + "\n";
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out = csv_line(t.header);
  for (const auto& r : t.rows) out += csv_line(r);
  return out;
}

Table parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (quoted) {
      if (ch == '"' && k + 1 < text.size() && text[k + 1] == '"') {
        field += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = any = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
      row.push_back(std::move(field));
      field.clear();
      lines.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw ContractViolation("csv: unterminated quote");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    lines.push_back(std::move(row));
  }
  Table t;
  if (lines.empty()) return t;
  t.header = std::move(lines.front());
  t.rows.assign(std::make_move_iterator(lines.begin() + 1), std::make_move_iterator(lines.end()));
  return t;
}

void write_csv(const std::filesystem::path& path, const Table& t) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArenaError("cannot write " + path.string());
  out << to_csv(t);
  if (!out) throw ArenaError("write failed: " + path.string());
}

Table ratings_table(const ratings::EloRatingSet& set) {
  Table t{{"agent", "game", "rating"}, {}};
  for (const auto& a : set.agents) {
    t.rows.push_back({a, "global", format_number(set.rating(a))});
    if (set.per_game.empty()) continue;
    for (GameKind g : kAllGames)
      if (set.per_game.count({a, g})) t.rows.push_back({a, std::string(to_string(g)), format_number(set.rating(a, g))});
  }
  return t;
}

Table bootstrap_table(const ratings::BootstrapResult& result) {
  Table t{{"agent", "sample", "rating"}, {}};
  for (const auto& a : result.agents) {
    const auto& s = result.samples.at(a);
    for (std::size_t k = 0; k < s.size(); ++k) t.rows.push_back({a, std::to_string(k), format_number(s[k])});
  }
  return t;
}

Table bootstrap_quantile_table(const ratings::BootstrapResult& result) {
  Table t{{"agent", "q025", "q25", "q50", "q75", "q975"}, {}};
  for (const auto& a : result.agents) {
    std::vector<std::string> row{a};
    for (double q : result.quantiles.at(a)) row.push_back(format_number(q));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table heatmap_table(const Heatmap& h) {
  Table t{{"row", "column", "value", "count", "flagged"}, {}};
  for (std::size_t r = 0; r < h.agents.size(); ++r)
    for (std::size_t c = 0; c < h.agents.size(); ++c) {
      if (r == c) continue;
      t.rows.push_back({h.agents[r], h.agents[c], format_optional(h.value(r, c)), std::to_string(h.counts[r][c]),
                        h.flagged(r, c) ? "1" : "0"});
    }
  return t;
}

Table similarity_table(const SimilarityMatrix& m) {
  Table t{{"row", "column", "value"}, {}};
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < m.size(); ++c) t.rows.push_back({m.label(r), m.label(c), format_optional(m.at(r, c))});
  return t;
}

Table consistency_table(const ConsistencyReport& r) {
  Table t{{"label", "mean", "sem", "n", "gap"}, {}};
  auto add = [&](const std::string& label, const Stat& s) {
    t.rows.push_back({label, format_optional(s.mean), format_optional(s.sem), std::to_string(s.n), s.gap});
  };
  add("intra_game", r.intra_game);
  add("inter_game", r.inter_game);
  add("framing_intra", r.framing_intra);
  add("framing_inter", r.framing_inter);
  add("aggregated_framing_intra", r.aggregated_framing_intra);
  add("aggregated_framing_inter", r.aggregated_framing_inter);
  add("block_diagonal", r.block_mean);
  add("off_block", r.off_block_mean);
  for (const auto& [a, s] : r.intra_by_agent) add("intra_game:" + a, s);
  return t;
}

Table bar_table(const std::vector<std::string>& labels, const std::vector<double>& means,
                const std::vector<std::optional<double>>& sems) {
  if (labels.size() != means.size() || labels.size() != sems.size())
    throw ContractViolation("bar_table: column lengths differ");
  Table t{{"label", "mean", "sem"}, {}};
  for (std::size_t k = 0; k < labels.size(); ++k)
    t.rows.push_back({labels[k], format_number(means[k]), format_optional(sems[k])});
  return t;
}

Table roc_table(const std::map<std::string, std::vector<std::pair<double, double>>>& curves) {
  Table t{{"series", "fpr", "tpr"}, {}};
  for (const auto& [name, pts] : curves)
    for (const auto& [f, tp] : pts) t.rows.push_back({name, format_number(f), format_number(tp)});
  return t;
}

Table importance_table(const std::map<std::optional<GameKind>, std::vector<predictor::Importance>>& imp) {
  Table t{{"game", "feature", "weight"}, {}};
  for (const auto& [g, list] : imp)
    for (const auto& i : list)
      t.rows.push_back({g ? std::string(to_string(*g)) : "all", i.feature, format_number(i.weight)});
  return t;
}

Table auc_table(const std::map<std::string, predictor::CvReport>& reports) {
  Table t{{"model", "fold", "auc", "skip_reason"}, {}};
  for (const auto& [name, rep] : reports) {
    for (const auto& f : rep.folds) t.rows.push_back({name, f.label, format_optional(f.auc), f.skip_reason});
    t.rows.push_back({name, "mean", format_number(rep.mean_auc), ""});
  }
  return t;
}

}  // namespace arena::report
