#pragma once

#include "claimcheck/analysis.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace claimcheck {

inline constexpr int kReportSchemaVersion = 1;

struct ExcludedImage {
  std::string id;
  std::string reason;
};

/// Run facts that accompany a verdict in the written report.
struct ReportContext {
  std::string case_name;
  std::map<std::string, std::string> figures;  // role -> path relative to the report
  std::vector<ExcludedImage> excluded;
  int clamped_cells = 0;
};

struct ReportDocument {
  VerdictReport report;
  ReportContext context;
};

nlohmann::json to_json(const HistogramSpec& spec);
HistogramSpec histogram_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScoreDistributions& d);
ScoreDistributions distributions_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AffinityMatrix& m);
AffinityMatrix affinity_from_json(const nlohmann::json& j);

nlohmann::json to_json(const QualityTable& table);
QualityTable quality_table_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ReportDocument& doc);
ReportDocument report_from_json(const nlohmann::json& j);

std::string markdown_summary(const ReportDocument& doc);

struct ReportFiles {
  std::filesystem::path json;
  std::filesystem::path markdown;
};

/// Writes <stem>.json (schema-versioned) and <stem>.md into `out_dir`.
ReportFiles write_report(const ReportDocument& doc, const std::filesystem::path& out_dir,
                         const std::string& stem = "report");

/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Fixed-point formatting used by every text artifact.
std::string fixed(double v, int decimals = 6);

}  // namespace claimcheck
