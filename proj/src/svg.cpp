#include "arena/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace arena::svg {
namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

double parse(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ContractViolation("not a number in figure table: '" + s + "'");
  }
}

struct Canvas {
  double width, height;
  std::ostringstream body;

  Canvas(double w, double h, const std::string& title) : width(w), height(h) {
    text(w / 2, 22, title, 15, "middle");
  }

  void text(double x, double y, const std::string& s, int size = 11, const char* anchor = "start",
            double rotate = 0) {
    body << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size << "\" text-anchor=\""
         << anchor << "\"";
    if (rotate != 0) body << " transform=\"rotate(" << num(rotate) << " " << num(x) << " " << num(y) << ")\"";
    body << ">" << escape(s) << "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2, const char* stroke = "#333", double w = 1,
            const char* dash = nullptr) {
    body << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
         << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(w) << "\"";
    if (dash) body << " stroke-dasharray=\"" << dash << "\"";
    body << "/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill, const char* extra = "") {
    body << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
         << "\" fill=\"" << fill << "\" " << extra << "/>\n";
  }
  void poly(const std::vector<std::pair<double, double>>& pts, const std::string& fill, const std::string& stroke,
            bool closed, double opacity = 1.0) {
    body << "<" << (closed ? "polygon" : "polyline") << " points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) body << (k ? " " : "") << num(pts[k].first) << "," << num(pts[k].second);
    body << "\" fill=\"" << fill << "\" fill-opacity=\"" << num(opacity) << "\" stroke=\"" << stroke
         << "\" stroke-width=\"1.5\"/>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\" font-family=\"sans-serif\">\n"
        << "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">"
        << "<rect width=\"6\" height=\"6\" fill=\"#eee\"/><path d=\"M0,6 L6,0\" stroke=\"#aaa\"/></pattern></defs>\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body.str() << "</svg>\n";
    return out.str();
  }
};

// Linear axis ticks over [lo, hi].
std::vector<double> ticks(double lo, double hi, int target = 5) {
  const double span = hi - lo;
  if (span <= 0) return {lo};
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) out.push_back(std::abs(v) < 1e-12 ? 0.0 : v);
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Diverging white-centred scale around the midpoint of [vmin, vmax].
std::string color(double v, double vmin, double vmax) {
  auto mix = [](double t, int r, int g, int b) {
    t = std::clamp(t, 0.0, 1.0);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(255 + (r - 255) * t)),
                  static_cast<int>(std::lround(255 + (g - 255) * t)), static_cast<int>(std::lround(255 + (b - 255) * t)));
    return std::string(buf);
  };
  const double mid = (vmin + vmax) / 2;
  if (v >= mid) return mix((v - mid) / (vmax - mid), 178, 24, 43);
  return mix((mid - v) / (mid - vmin), 33, 102, 172);
}

std::vector<std::string> ordered_labels(const report::Table& t, std::size_t col) {
  std::vector<std::string> out;
  for (const auto& r : t.rows)
    if (std::find(out.begin(), out.end(), r[col]) == out.end()) out.push_back(r[col]);
  return out;
}

}  // namespace

std::string violin(const report::Table& t, const std::string& title) {
  const std::size_t ca = t.column("agent"), cr = t.column("rating");
  const auto agents = ordered_labels(t, ca);
  std::map<std::string, std::vector<double>> samples;
  double lo = 1e300, hi = -1e300;
  for (const auto& r : t.rows) {
    const double v = parse(r[cr]);
    samples[r[ca]].push_back(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (agents.empty()) lo = 1400, hi = 1600;
  if (hi - lo < 1) lo -= 1, hi += 1;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double left = 70, top = 40, plot_h = 320, slot = 80;
  Canvas c(left + slot * std::max<std::size_t>(agents.size(), 1) + 20, top + plot_h + 90, title);
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };
  for (double tk : ticks(lo, hi)) {
    c.line(left - 4, y_of(tk), left + slot * agents.size(), y_of(tk), "#ddd");
    c.text(left - 6, y_of(tk) + 4, tick_label(tk), 10, "end");
  }
  c.line(left, top, left, top + plot_h);
  c.text(18, top + plot_h / 2, "rating", 11, "middle", -90);

  for (std::size_t k = 0; k < agents.size(); ++k) {
    auto s = samples[agents[k]];
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double mean = 0, var = 0;
    for (double v : s) mean += v;
    mean /= n;
    for (double v : s) var += (v - mean) * (v - mean);
    const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    const double bw = std::max(1.06 * sd * std::pow(n, -0.2), 1e-3 * (hi - lo));
    const double cx = left + slot * (k + 0.5);
    const int grid = 60;
    std::vector<double> dens(grid + 1);
    const double a = s.front() - 2 * bw, b = s.back() + 2 * bw;
    double peak = 0;
    for (int g = 0; g <= grid; ++g) {
      const double x = a + (b - a) * g / grid;
      double d = 0;
      for (double v : s) d += std::exp(-0.5 * ((x - v) / bw) * ((x - v) / bw));
      dens[g] = d;
      peak = std::max(peak, d);
    }
    std::vector<std::pair<double, double>> pts;
    for (int g = 0; g <= grid; ++g) pts.push_back({cx + 0.42 * slot * dens[g] / peak, y_of(a + (b - a) * g / grid)});
    for (int g = grid; g >= 0; --g) pts.push_back({cx - 0.42 * slot * dens[g] / peak, y_of(a + (b - a) * g / grid)});
    const std::string col = kPalette[k % std::size(kPalette)];
    c.poly(pts, col, col, true, 0.6);
    const double med = ratings::quantile(s, 0.5);
    c.line(cx - 0.2 * slot, y_of(med), cx + 0.2 * slot, y_of(med), "#000", 2);
    c.text(cx, top + plot_h + 16, agents[k], 10, "end", -35);
  }
  return c.str();
}

std::string heatmap(const report::Table& t, const std::string& row_col, const std::string& col_col,
                    const std::string& value_col, double vmin, double vmax, const std::string& title) {
  const std::size_t cr = t.column(row_col), cc = t.column(col_col), cv = t.column(value_col);
  auto rows = ordered_labels(t, cr);
  auto cols = ordered_labels(t, cc);
  // Square matrices share one label order.
  for (const auto& l : cols)
    if (std::find(rows.begin(), rows.end(), l) == rows.end()) rows.push_back(l);
  cols = rows;
  const std::size_t n = rows.size();
  const double cell = n > 40 ? 6.0 : n > 12 ? 14.0 : 48.0;
  const bool labels = n <= 40;
  const bool numbers = n <= 12;
  const double left = labels ? 160 : 40, top = labels ? 50 : 40;
  Canvas c(left + cell * n + 90, top + cell * n + (labels ? 130 : 40), title);
  std::map<std::pair<std::string, std::string>, std::string> val;
  for (const auto& r : t.rows) val[{r[cr], r[cc]}] = r[cv];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = left + cell * j, y = top + cell * i;
      auto it = val.find({rows[i], cols[j]});
      if (it == val.end() || it->second.empty()) {
        if (i != j || it != val.end()) c.rect(x, y, cell, cell, "url(#hatch)");
        else c.rect(x, y, cell, cell, "#f7f7f7");
        continue;
      }
      const double v = parse(it->second);
      c.rect(x, y, cell, cell, color(v, vmin, vmax));
      if (numbers) c.text(x + cell / 2, y + cell / 2 + 4, num(v), 10, "middle");
    }
  if (labels)
    for (std::size_t i = 0; i < n; ++i) {
      c.text(left - 4, top + cell * (i + 0.5) + 4, rows[i], 10, "end");
      c.text(left + cell * (i + 0.5), top + cell * n + 8, cols[i], 10, "end", -50);
    }
  // Color bar.
  const double bx = left + cell * n + 30, bh = std::max(cell * n, 100.0);
  for (int k = 0; k < 50; ++k) {
    const double v = vmax - (vmax - vmin) * k / 49.0;
    c.rect(bx, top + bh * k / 50.0, 14, bh / 50.0 + 0.5, color(v, vmin, vmax));
  }
  c.text(bx + 18, top + 8, tick_label(vmax), 10);
  c.text(bx + 18, top + bh, tick_label(vmin), 10);
  return c.str();
}

std::string bars(const report::Table& t, const std::string& mean_col, const std::string& title) {
  const std::size_t cl = t.column("label"), cm = t.column(mean_col);
  std::optional<std::size_t> cs;
  if (std::find(t.header.begin(), t.header.end(), "sem") != t.header.end()) cs = t.column("sem");
  struct Bar {
    std::string label;
    double mean;
    std::optional<double> sem;
  };
  std::vector<Bar> bs;
  double lo = 0, hi = 0;
  for (const auto& r : t.rows) {
    if (r[cm].empty()) continue;
    Bar b{r[cl], parse(r[cm]), std::nullopt};
    if (cs && !r[*cs].empty()) b.sem = parse(r[*cs]);
    const double e = b.sem.value_or(0.0);
    lo = std::min(lo, b.mean - e);
    hi = std::max(hi, b.mean + e);
    bs.push_back(b);
  }
  if (hi - lo < 1e-9) hi = lo + 1;
  const double pad = 0.08 * (hi - lo);
  hi += pad;
  if (lo < 0) lo -= pad;
  const double left = 70, top = 40, plot_h = 280, slot = 46;
  Canvas c(left + slot * std::max<std::size_t>(bs.size(), 1) + 20, top + plot_h + 150, title);
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };
  for (double tk : ticks(lo, hi)) {
    c.line(left - 4, y_of(tk), left + slot * bs.size(), y_of(tk), "#ddd");
    c.text(left - 6, y_of(tk) + 4, tick_label(tk), 10, "end");
  }
  c.line(left, y_of(0), left + slot * bs.size(), y_of(0));
  for (std::size_t k = 0; k < bs.size(); ++k) {
    const auto& b = bs[k];
    const double x = left + slot * k + 8, w = slot - 16;
    const double y0 = y_of(std::max(b.mean, 0.0)), y1 = y_of(std::min(b.mean, 0.0));
    c.rect(x, y0, w, y1 - y0, kPalette[k % std::size(kPalette)]);
    if (b.sem) {
      const double cx = x + w / 2;
      c.line(cx, y_of(b.mean - *b.sem), cx, y_of(b.mean + *b.sem), "#000", 1.2);
      c.line(cx - 5, y_of(b.mean - *b.sem), cx + 5, y_of(b.mean - *b.sem), "#000", 1.2);
      c.line(cx - 5, y_of(b.mean + *b.sem), cx + 5, y_of(b.mean + *b.sem), "#000", 1.2);
    }
    c.text(x + w / 2, top + plot_h + 14, b.label, 10, "end", -45);
  }
  return c.str();
}

std::string roc(const report::Table& t, const std::string& title) {
  const std::size_t cs = t.column("series"), cf = t.column("fpr"), ct = t.column("tpr");
  const auto series = ordered_labels(t, cs);
  const double left = 60, top = 40, side = 320;
  Canvas c(left + side + 200, top + side + 60, title);
  auto px = [&](double f) { return left + side * f; };
  auto py = [&](double v) { return top + side * (1 - v); };
  c.rect(left, top, side, side, "none", "stroke=\"#333\"");
  for (double tk : ticks(0, 1)) {
    c.text(px(tk), top + side + 16, tick_label(tk), 10, "middle");
    c.text(left - 6, py(tk) + 4, tick_label(tk), 10, "end");
  }
  c.line(px(0), py(0), px(1), py(1), "#999", 1, "4,3");
  c.text(left + side / 2, top + side + 36, "false positive rate", 11, "middle");
  c.text(18, top + side / 2, "true positive rate", 11, "middle", -90);
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : t.rows)
      if (r[cs] == series[k]) pts.push_back({px(parse(r[cf])), py(parse(r[ct]))});
    const std::string col = kPalette[k % std::size(kPalette)];
    c.poly(pts, "none", col, false);
    c.line(left + side + 16, top + 14 + 18 * k, left + side + 36, top + 14 + 18 * k, col.c_str(), 2);
    c.text(left + side + 42, top + 18 + 18 * k, series[k], 10);
  }
  return c.str();
}

void write(const std::filesystem::path& path, const std::string& svg) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArenaError("cannot write " + path.string());
  out << svg;
  if (!out) throw ArenaError("write failed: " + path.string());
}

}  // namespace arena::svg
