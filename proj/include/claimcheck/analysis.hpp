#pragma once

#include "claimcheck/descriptors.hpp"
#include "claimcheck/quality.hpp"
#include "claimcheck/stats.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace claimcheck {

/// All-vs-All cosine similarities with the per-row identity metadata.
struct AffinityMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  /// order[i] is the row of the unsorted matrix now shown at row i.
  std::vector<std::size_t> order;
  std::optional<Metric> sort_key;
  /// Distinct labels in first-appearance order of the unsorted matrix.
  std::vector<std::string> tags;

  Eigen::Index size() const { return values.rows(); }
};

/// values(i, j) = cosine(e_i, e_j). `workers` > 1 splits rows across threads.
AffinityMatrix all_vs_all(std::span<const EmbeddingVector> embeddings,
                          std::span<const std::string> labels, int workers = 1);

/// One side of a score distribution.
struct ScoreSummary {
  Eigen::Index count = 0;
  double mean = 0.0;
  double std = 0.0;  // population
  Eigen::ArrayXd mass;
};

ScoreSummary summarize(const Eigen::VectorXd& scores, const HistogramSpec& spec);

/// Genuine and impostor scores, each stored in ascending order so every
/// derived statistic is independent of input image order.
struct ScoreDistributions {
  Eigen::VectorXd genuine;
  Eigen::VectorXd impostor;
  HistogramSpec histogram;
  ScoreSummary genuine_summary;
  ScoreSummary impostor_summary;

  static ScoreDistributions from_scores(std::vector<double> genuine, std::vector<double> impostor,
                                        const HistogramSpec& spec = {});
};

/// Unordered pairs i < j, diagonal excluded: same label is genuine, cross
/// label is impostor. Requires exactly two distinct labels.
ScoreDistributions partition_scores(const AffinityMatrix& matrix, const HistogramSpec& spec = {});

/// Reference population with many identities: within-identity pairs are
/// genuine, cross-identity pairs impostor. Needs >= 2 identities with >= 2
/// images each.
ScoreDistributions calibration_distributions(std::span<const EmbeddingVector> embeddings,
                                             std::span<const std::string> labels,
                                             const HistogramSpec& spec = {});

/// Embeds reference faces with `descriptor` and calibrates on them.
ScoreDistributions calibration_distributions(std::span<const AlignedFace> reference,
                                             const Descriptor& descriptor,
                                             const HistogramSpec& spec = {});

using QualityTable = std::map<std::string, QualityScores>;

/// Reorders rows and columns by ascending quality, ties by source id.
AffinityMatrix sort_by_quality(const AffinityMatrix& matrix, const QualityTable& quality, Metric metric);

/// Mean similarity of each row to every other row.
Eigen::VectorXd mean_offdiagonal_similarity(const AffinityMatrix& matrix);

/// Spearman correlation between per-image quality and mean similarity.
double quality_confound(const AffinityMatrix& matrix, const QualityTable& quality, Metric metric);

struct ConfoundEntry {
  Metric metric;
  std::optional<double> rho;
  std::string note;  // why rho is missing
};

std::vector<ConfoundEntry> confound_table(const AffinityMatrix& matrix, const QualityTable& quality);

struct Thresholds {
  double tau_same = 0.50;
  double tau_diff = 0.20;
};

enum class Verdict { same_person, distinct_person, inconclusive };

std::string_view verdict_name(Verdict v);
std::optional<Verdict> verdict_from_name(std::string_view name);

/// same-person: overlap with calibration genuine >= tau_same and with
/// calibration impostor <= tau_diff; distinct-person: the mirror image.
Verdict decide(double overlap_with_genuine, double overlap_with_impostor, const Thresholds& t);

struct VerdictReport {
  std::string descriptor;
  ScoreDistributions case_scores;
  std::optional<ScoreDistributions> calibration;
  std::optional<double> overlap_impostor_vs_calibration_genuine;
  std::optional<double> overlap_impostor_vs_calibration_impostor;
  std::optional<double> case_genuine_impostor_overlap;
  std::optional<double> d_prime;
  std::vector<ConfoundEntry> confounds;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> reasons;
  Thresholds thresholds;
};

VerdictReport verdict(const ScoreDistributions& case_scores,
                      const std::optional<ScoreDistributions>& calibration,
                      std::vector<ConfoundEntry> confounds, const Thresholds& thresholds = {},
                      std::string descriptor = {});

}  // namespace claimcheck
