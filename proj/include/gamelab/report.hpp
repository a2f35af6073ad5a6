#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gamelab/tables.hpp"

namespace gamelab {

enum class TableId { T1, T2, T3, T4, T5, Fig1, Fig2 };

std::string_view to_string(TableId t);
// "t1".."t5", "fig1", "fig2"; throws UsageError listing the valid names.
TableId parse_table_id(std::string_view s);
GameKind game_for(TableId t);
std::vector<TableId> tables_for(GameKind game);

struct ReportFile {
  std::string name;  // e.g. "t1.csv"
  std::string contents;
};

struct Report {
  std::vector<ReportFile> files;  // one CSV per selected table
  std::string text;               // human-readable rendering with stars
};

// Throws UsageError when a selected table belongs to the other game.
Report build_report(const TranscriptSet& set, const std::vector<TableId>& tables, const AnalysisOptions& opt = {},
                    const std::vector<std::string>& inputs = {});

// Fixed-precision number formatting shared by the CSV writers.
std::string format_number(double v, int decimals = 6);

}  // namespace gamelab
