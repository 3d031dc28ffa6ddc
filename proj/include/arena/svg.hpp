#pragma once

// Self-contained SVG renderings of report tables. Each chart reads its numbers
// from the same Table that is written as the figure's CSV twin.

#include <filesystem>
#include <string>

#include "arena/report.hpp"

namespace arena::svg {

// Columns agent,sample,rating. One mirrored density per agent, median marked.
std::string violin(const report::Table& t, const std::string& title);

// Long-form grid. Labels keep their first-appearance order; empty values are
// drawn as hatched cells.
std::string heatmap(const report::Table& t, const std::string& row_col, const std::string& col_col,
                    const std::string& value_col, double vmin, double vmax, const std::string& title);

// Columns label,mean[,sem]. Error bars where sem is present.
std::string bars(const report::Table& t, const std::string& mean_col, const std::string& title);

// Columns series,fpr,tpr.
std::string roc(const report::Table& t, const std::string& title);

void write(const std::filesystem::path& path, const std::string& svg);

}  // namespace arena::svg
