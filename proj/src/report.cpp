#include "claimcheck/report.hpp"

#include "claimcheck/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace claimcheck {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

json side_json(const Eigen::VectorXd& scores, const ScoreSummary& s) {
  return {{"count", s.count},
          {"mean", s.mean},
          {"std", s.std},
          {"histogram", std::vector<double>(s.mass.data(), s.mass.data() + s.mass.size())},
          {"scores", std::vector<double>(scores.data(), scores.data() + scores.size())}};
}

std::vector<double> doubles(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw ParseError(std::string("missing array '") + key + "'");
  return j[key].get<std::vector<double>>();
}

std::string opt_fixed(const std::optional<double>& v, int decimals = 4) {
  return v ? fixed(*v, decimals) : std::string("n/a");
}

}  // namespace

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

json to_json(const HistogramSpec& spec) { return {{"bins", spec.bins}, {"lo", spec.lo}, {"hi", spec.hi}}; }

HistogramSpec histogram_from_json(const json& j) {
  HistogramSpec s;
  s.bins = j.value("bins", s.bins);
  s.lo = j.value("lo", s.lo);
  s.hi = j.value("hi", s.hi);
  if (s.bins <= 0 || !(s.hi > s.lo)) throw ParseError("invalid histogram settings");
  return s;
}

json to_json(const ScoreDistributions& d) {
  return {{"histogram_spec", to_json(d.histogram)},
          {"genuine", side_json(d.genuine, d.genuine_summary)},
          {"impostor", side_json(d.impostor, d.impostor_summary)}};
}

ScoreDistributions distributions_from_json(const json& j) {
  try {
    return ScoreDistributions::from_scores(doubles(j.at("genuine"), "scores"), doubles(j.at("impostor"), "scores"),
                                           histogram_from_json(j.at("histogram_spec")));
  } catch (const json::exception& e) {
    throw ParseError(std::string("score distributions: ") + e.what());
  }
}

json to_json(const AffinityMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.size()));
    for (Eigen::Index j = 0; j < m.size(); ++j) row[static_cast<std::size_t>(j)] = m.values(i, j);
    rows.push_back(row);
  }
  return {{"ids", m.ids},
          {"labels", m.labels},
          {"tags", m.tags},
          {"order", m.order},
          {"sort_key", m.sort_key ? json(std::string(metric_name(*m.sort_key))) : json(nullptr)},
          {"values", rows}};
}

AffinityMatrix affinity_from_json(const json& j) {
  try {
    AffinityMatrix m;
    m.ids = j.at("ids").get<std::vector<std::string>>();
    m.labels = j.at("labels").get<std::vector<std::string>>();
    m.tags = j.at("tags").get<std::vector<std::string>>();
    m.order = j.at("order").get<std::vector<std::size_t>>();
    if (const auto& key = j.at("sort_key"); !key.is_null()) m.sort_key = metric_from_name(key.get<std::string>());
    const auto& rows = j.at("values");
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (static_cast<std::size_t>(n) != m.ids.size() || m.labels.size() != m.ids.size() ||
        m.order.size() != m.ids.size())
      throw ParseError("affinity matrix fields disagree on size");
    m.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto row = rows[static_cast<std::size_t>(i)].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != n) throw ParseError("affinity matrix is not square");
      for (Eigen::Index k = 0; k < n; ++k) m.values(i, k) = row[static_cast<std::size_t>(k)];
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("affinity matrix: ") + e.what());
  }
}

json to_json(const QualityTable& table) {
  json out = json::object();
  for (const auto& [id, scores] : table) {
    json row = json::object();
    for (Metric m : kAllMetrics) row[std::string(metric_name(m))] = optional_number(scores[m]);
    out[id] = row;
  }
  return out;
}

QualityTable quality_table_from_json(const json& j) {
  QualityTable table;
  for (const auto& [id, row] : j.items()) {
    QualityScores s;
    for (Metric m : kAllMetrics) s[m] = number_or_null(row, std::string(metric_name(m)).c_str());
    table[id] = s;
  }
  return table;
}

json to_json(const ReportDocument& doc) {
  const VerdictReport& r = doc.report;
  json confounds = json::array();
  for (const auto& c : r.confounds)
    confounds.push_back({{"metric", std::string(metric_name(c.metric))}, {"rho", optional_number(c.rho)}, {"note", c.note}});
  json excluded = json::array();
  for (const auto& e : doc.context.excluded) excluded.push_back({{"id", e.id}, {"reason", e.reason}});
  return {
      {"schema_version", kReportSchemaVersion},
      {"case_name", doc.context.case_name},
      {"descriptor", r.descriptor},
      {"verdict", std::string(verdict_name(r.verdict))},
      {"reasons", r.reasons},
      {"thresholds", {{"tau_same", r.thresholds.tau_same}, {"tau_diff", r.thresholds.tau_diff}}},
      {"method",
       {{"pairs", "unordered, diagonal excluded"},
        {"density", "step histogram"},
        {"similarity_summary", "mean off-diagonal similarity"},
        {"rank_correlation", "spearman, average ranks for ties"}}},
      {"case", to_json(r.case_scores)},
      {"calibration", r.calibration ? to_json(*r.calibration) : json(nullptr)},
      {"overlap",
       {{"case_impostor_vs_calibration_genuine", optional_number(r.overlap_impostor_vs_calibration_genuine)},
        {"case_impostor_vs_calibration_impostor", optional_number(r.overlap_impostor_vs_calibration_impostor)},
        {"case_genuine_vs_case_impostor", optional_number(r.case_genuine_impostor_overlap)}}},
      {"d_prime", optional_number(r.d_prime)},
      {"quality_confound", confounds},
      {"figures", doc.context.figures},
      {"excluded", excluded},
      {"rendering", {{"clamped_cells", doc.context.clamped_cells}, {"color_range", {0.0, 1.0}}}},
  };
}

ReportDocument report_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) throw ParseError("unsupported report schema version");
    ReportDocument doc;
    VerdictReport& r = doc.report;
    r.descriptor = j.at("descriptor").get<std::string>();
    const auto v = verdict_from_name(j.at("verdict").get<std::string>());
    if (!v) throw ParseError("unknown verdict");
    r.verdict = *v;
    r.reasons = j.at("reasons").get<std::vector<std::string>>();
    r.thresholds.tau_same = j.at("thresholds").at("tau_same").get<double>();
    r.thresholds.tau_diff = j.at("thresholds").at("tau_diff").get<double>();
    r.case_scores = distributions_from_json(j.at("case"));
    if (!j.at("calibration").is_null()) r.calibration = distributions_from_json(j.at("calibration"));
    const json& ov = j.at("overlap");
    r.overlap_impostor_vs_calibration_genuine = number_or_null(ov, "case_impostor_vs_calibration_genuine");
    r.overlap_impostor_vs_calibration_impostor = number_or_null(ov, "case_impostor_vs_calibration_impostor");
    r.case_genuine_impostor_overlap = number_or_null(ov, "case_genuine_vs_case_impostor");
    r.d_prime = number_or_null(j, "d_prime");
    for (const auto& c : j.at("quality_confound")) {
      const auto m = metric_from_name(c.at("metric").get<std::string>());
      if (!m) throw ParseError("unknown metric in confound table");
      r.confounds.push_back({*m, number_or_null(c, "rho"), c.value("note", "")});
    }
    doc.context.case_name = j.at("case_name").get<std::string>();
    doc.context.figures = j.at("figures").get<std::map<std::string, std::string>>();
    for (const auto& e : j.at("excluded"))
      doc.context.excluded.push_back({e.at("id").get<std::string>(), e.at("reason").get<std::string>()});
    doc.context.clamped_cells = j.at("rendering").at("clamped_cells").get<int>();
    return doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

std::string markdown_summary(const ReportDocument& doc) {
  const VerdictReport& r = doc.report;
  std::ostringstream md;
  md << "# Identity claim report: " << doc.context.case_name << "\n\n";
  md << "- Descriptor: `" << r.descriptor << "`\n";
  md << "- Verdict: **" << verdict_name(r.verdict) << "**\n";
  for (const auto& reason : r.reasons) md << "  - " << reason << "\n";
  md << "- Thresholds: tau_same = " << fixed(r.thresholds.tau_same, 2) << ", tau_diff = "
     << fixed(r.thresholds.tau_diff, 2) << "\n\n";

  md << "## Score distributions\n\n";
  md << "| side | count | mean | std |\n|---|---:|---:|---:|\n";
  auto row = [&](const char* name, const ScoreSummary& s) {
    md << "| " << name << " | " << s.count << " | " << fixed(s.mean, 4) << " | " << fixed(s.std, 4) << " |\n";
  };
  row("case genuine", r.case_scores.genuine_summary);
  row("case impostor", r.case_scores.impostor_summary);
  if (r.calibration) {
    row("reference genuine", r.calibration->genuine_summary);
    row("reference impostor", r.calibration->impostor_summary);
  }
  md << "\nHistograms: " << r.case_scores.histogram.bins << " bins over [" << fixed(r.case_scores.histogram.lo, 1)
     << ", " << fixed(r.case_scores.histogram.hi, 1) << "], unordered pairs, diagonal excluded.\n\n";

  md << "## Overlap and separation\n\n";
  md << "- overlap(case impostor, reference genuine) = " << opt_fixed(r.overlap_impostor_vs_calibration_genuine) << "\n";
  md << "- overlap(case impostor, reference impostor) = " << opt_fixed(r.overlap_impostor_vs_calibration_impostor)
     << "\n";
  md << "- overlap(case genuine, case impostor) = " << opt_fixed(r.case_genuine_impostor_overlap) << "\n";
  md << "- d' (case genuine vs impostor) = " << opt_fixed(r.d_prime) << "\n\n";

  md << "## Quality confound\n\n";
  md << "Spearman correlation between each image's quality score and its mean similarity to the other images.\n\n";
  md << "| metric | rho | note |\n|---|---:|---|\n";
  for (const auto& c : r.confounds)
    md << "| " << metric_name(c.metric) << " | " << opt_fixed(c.rho) << " | " << c.note << " |\n";

  if (!doc.context.figures.empty()) {
    md << "\n## Figures\n\n";
    for (const auto& [role, path] : doc.context.figures) md << "- " << role << ": ![" << role << "](" << path << ")\n";
  }
  if (!doc.context.excluded.empty()) {
    md << "\n## Excluded images\n\n";
    for (const auto& e : doc.context.excluded) md << "- `" << e.id << "`: " << e.reason << "\n";
  }
  if (doc.context.clamped_cells > 0)
    md << "\nHeatmap colors clamp " << doc.context.clamped_cells << " cells outside [0, 1].\n";
  return md.str();
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IOError("failed writing " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ReportFiles write_report(const ReportDocument& doc, const std::filesystem::path& out_dir, const std::string& stem) {
  ReportFiles files{out_dir / (stem + ".json"), out_dir / (stem + ".md")};
  write_json_file(to_json(doc), files.json);
  std::ofstream md(files.markdown, std::ios::binary);
  if (!md) throw IOError("cannot write " + files.markdown.string());
  md << markdown_summary(doc);
  if (!md) throw IOError("failed writing " + files.markdown.string());
  return files;
}

}  // namespace claimcheck
