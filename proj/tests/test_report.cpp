#include "doctest.h"
#include "testdir.hpp"

#include "claimcheck/report.hpp"

#include <fstream>
#include <sstream>

using namespace claimcheck;

namespace {

ReportDocument same_person_document() {
  std::vector<double> g, i;
  for (int k = 0; k < 30; ++k) g.push_back(0.8 + 0.003 * k);
  for (int k = 0; k < 80; ++k) i.push_back(0.1 + 0.004 * k);
  const ScoreDistributions cal = ScoreDistributions::from_scores(g, i);
  const ScoreDistributions c = ScoreDistributions::from_scores({0.85, 0.88, 0.9}, {0.82, 0.84, 0.86, 0.87});
  std::vector<ConfoundEntry> conf;
  for (Metric m : kAllMetrics) conf.push_back({m, m == Metric::femininity ? std::nullopt : std::optional(0.25), ""});
  conf[6].note = "no classifier";
  ReportDocument doc{verdict(c, cal, conf, {}, "baseline"), {}};
  doc.context.case_name = "unit case";
  doc.context.figures["heatmap_unsorted"] = "heatmap_unsorted.png";
  doc.context.excluded.push_back({"bad.png", "DecodeError: unreadable"});
  doc.context.clamped_cells = 3;
  return doc;
}

}  // namespace

TEST_CASE("fixed formatting") {
  CHECK(fixed(0.5, 3) == "0.500");
  CHECK(fixed(-0.0, 2) == "0.00");
  CHECK(fixed(-0.0001, 2) == "0.00");
  CHECK(fixed(-1.25, 1) == "-1.2");
}

TEST_CASE("report json round trip") {
  const ReportDocument doc = same_person_document();
  REQUIRE(doc.report.verdict == Verdict::same_person);
  const nlohmann::json j = to_json(doc);
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["verdict"] == "same-person");
  CHECK(j["descriptor"] == "baseline");
  const ReportDocument back = report_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(back.report.case_scores.impostor == doc.report.case_scores.impostor);
  CHECK(back.report.calibration->genuine == doc.report.calibration->genuine);
  CHECK(*back.report.overlap_impostor_vs_calibration_genuine == *doc.report.overlap_impostor_vs_calibration_genuine);
  CHECK(back.context.excluded.size() == 1);
  CHECK_FALSE(back.report.confounds[6].rho.has_value());
}

TEST_CASE("markdown summary") {
  const ReportDocument doc = same_person_document();
  const std::string md = markdown_summary(doc);
  CHECK(md.find("same-person") != std::string::npos);
  CHECK(md.find(fixed(*doc.report.overlap_impostor_vs_calibration_genuine, 4)) != std::string::npos);
  CHECK(md.find(fixed(*doc.report.overlap_impostor_vs_calibration_impostor, 4)) != std::string::npos);
  CHECK(md.find("bad.png") != std::string::npos);
  CHECK(md.find("femininity") != std::string::npos);
}

TEST_CASE("write report files") {
  const auto dir = test_dir("report");
  const ReportFiles files = write_report(same_person_document(), dir);
  CHECK(files.json == dir / "report.json");
  CHECK(read_json_file(files.json) == to_json(same_person_document()));
  std::ifstream md(files.markdown);
  std::stringstream ss;
  ss << md.rdbuf();
  CHECK(ss.str() == markdown_summary(same_person_document()));
}

TEST_CASE("affinity and quality round trip") {
  AffinityMatrix m;
  m.values = Eigen::MatrixXd::Identity(3, 3);
  m.values(0, 2) = m.values(2, 0) = 0.123456789012345;
  m.ids = {"a", "b", "c"};
  m.labels = {"x", "y", "x"};
  m.order = {2, 0, 1};
  m.sort_key = Metric::sharpness;
  m.tags = {"x", "y"};
  const AffinityMatrix back = affinity_from_json(to_json(m));
  CHECK(back.values == m.values);
  CHECK(back.order == m.order);
  CHECK(back.sort_key == m.sort_key);
  CHECK(back.tags == m.tags);

  QualityTable q;
  q["a"][Metric::brightness] = 0.25;
  q["b"][Metric::contrast] = 1.0 / 3.0;
  const QualityTable qb = quality_table_from_json(to_json(q));
  CHECK(qb.at("a")[Metric::brightness] == 0.25);
  CHECK_FALSE(qb.at("a")[Metric::contrast].has_value());
  CHECK(qb.at("b")[Metric::contrast] == 1.0 / 3.0);
}
