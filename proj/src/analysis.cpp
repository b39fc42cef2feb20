#include "claimcheck/analysis.hpp"

#include "claimcheck/errors.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

namespace claimcheck {

namespace {

std::vector<std::string> distinct_in_order(std::span<const std::string> labels) {
  std::vector<std::string> tags;
  for (const auto& l : labels)
    if (std::find(tags.begin(), tags.end(), l) == tags.end()) tags.push_back(l);
  return tags;
}

Eigen::VectorXd sorted_vector(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

const QualityScores& scores_for(const QualityTable& quality, const std::string& id) {
  static const QualityScores kMissing{};
  const auto it = quality.find(id);
  return it == quality.end() ? kMissing : it->second;
}

Eigen::VectorXd metric_column(const AffinityMatrix& matrix, const QualityTable& quality, Metric metric) {
  Eigen::VectorXd q(matrix.size());
  std::string missing;
  for (Eigen::Index i = 0; i < matrix.size(); ++i) {
    const auto& s = scores_for(quality, matrix.ids[static_cast<std::size_t>(i)])[metric];
    if (!s) {
      missing += (missing.empty() ? "" : ", ") + matrix.ids[static_cast<std::size_t>(i)];
      continue;
    }
    q(i) = *s;
  }
  if (!missing.empty())
    throw UnavailableMetricError(std::string(metric_name(metric)) + " unavailable for: " + missing);
  return q;
}

}  // namespace

AffinityMatrix all_vs_all(std::span<const EmbeddingVector> embeddings, std::span<const std::string> labels,
                          int workers) {
  if (embeddings.size() < 2) throw TooFewSamplesError("All-vs-All needs at least two embeddings");
  if (labels.size() != embeddings.size()) throw ValidationError("one label per embedding is required");
  const auto n = static_cast<Eigen::Index>(embeddings.size());
  for (const auto& e : embeddings) cosine(embeddings.front(), e);

  AffinityMatrix m;
  m.values.resize(n, n);
  std::atomic<Eigen::Index> next{0};
  auto work = [&] {
    for (Eigen::Index i = next++; i < n; i = next++)
      for (Eigen::Index j = i; j < n; ++j) {
        const double c = cosine(embeddings[static_cast<std::size_t>(i)], embeddings[static_cast<std::size_t>(j)]);
        m.values(i, j) = c;
        m.values(j, i) = c;
      }
  };
  const int threads = std::clamp(workers, 1, static_cast<int>(n));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }
  for (const auto& e : embeddings) m.ids.push_back(e.source_id);
  m.labels.assign(labels.begin(), labels.end());
  m.order.resize(static_cast<std::size_t>(n));
  std::iota(m.order.begin(), m.order.end(), std::size_t{0});
  m.tags = distinct_in_order(labels);
  return m;
}

ScoreSummary summarize(const Eigen::VectorXd& scores, const HistogramSpec& spec) {
  ScoreSummary s;
  s.count = scores.size();
  s.mass = histogram_mass(scores, spec);
  if (s.count > 0) {
    s.mean = scores.mean();
    s.std = population_std(scores);
  }
  return s;
}

ScoreDistributions ScoreDistributions::from_scores(std::vector<double> genuine, std::vector<double> impostor,
                                                   const HistogramSpec& spec) {
  ScoreDistributions d;
  d.genuine = sorted_vector(std::move(genuine));
  d.impostor = sorted_vector(std::move(impostor));
  d.histogram = spec;
  d.genuine_summary = summarize(d.genuine, spec);
  d.impostor_summary = summarize(d.impostor, spec);
  return d;
}

ScoreDistributions partition_scores(const AffinityMatrix& matrix, const HistogramSpec& spec) {
  const auto distinct = distinct_in_order(matrix.labels);
  if (distinct.size() != 2)
    throw LabelCountError("genuine/impostor partition needs exactly two labels, found " +
                          std::to_string(distinct.size()));
  std::vector<double> genuine, impostor;
  for (Eigen::Index i = 0; i < matrix.size(); ++i)
    for (Eigen::Index j = i + 1; j < matrix.size(); ++j) {
      const bool same = matrix.labels[static_cast<std::size_t>(i)] == matrix.labels[static_cast<std::size_t>(j)];
      (same ? genuine : impostor).push_back(matrix.values(i, j));
    }
  return ScoreDistributions::from_scores(std::move(genuine), std::move(impostor), spec);
}

ScoreDistributions calibration_distributions(std::span<const EmbeddingVector> embeddings,
                                             std::span<const std::string> labels, const HistogramSpec& spec) {
  if (labels.size() != embeddings.size()) throw ValidationError("one label per embedding is required");
  const auto tags = distinct_in_order(labels);
  if (tags.size() < 2) throw TooFewSamplesError("calibration needs at least two identities");
  for (const auto& t : tags)
    if (std::count(labels.begin(), labels.end(), t) < 2)
      throw TooFewSamplesError("identity '" + t + "' has fewer than two images");
  std::vector<double> genuine, impostor;
  for (std::size_t i = 0; i < embeddings.size(); ++i)
    for (std::size_t j = i + 1; j < embeddings.size(); ++j)
      (labels[i] == labels[j] ? genuine : impostor).push_back(cosine(embeddings[i], embeddings[j]));
  return ScoreDistributions::from_scores(std::move(genuine), std::move(impostor), spec);
}

ScoreDistributions calibration_distributions(std::span<const AlignedFace> reference, const Descriptor& descriptor,
                                             const HistogramSpec& spec) {
  std::vector<EmbeddingVector> embeddings;
  std::vector<std::string> labels;
  for (const auto& face : reference) {
    embeddings.push_back(descriptor.embed(face));
    labels.push_back(face.label);
  }
  return calibration_distributions(embeddings, labels, spec);
}

AffinityMatrix sort_by_quality(const AffinityMatrix& matrix, const QualityTable& quality, Metric metric) {
  const Eigen::VectorXd q = metric_column(matrix, quality, metric);
  std::vector<std::size_t> p(static_cast<std::size_t>(matrix.size()));
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::sort(p.begin(), p.end(), [&](std::size_t a, std::size_t b) {
    const double qa = q(static_cast<Eigen::Index>(a));
    const double qb = q(static_cast<Eigen::Index>(b));
    if (qa != qb) return qa < qb;
    return matrix.ids[a] < matrix.ids[b];
  });
  AffinityMatrix out;
  const auto n = matrix.size();
  out.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.values(i, j) = matrix.values(static_cast<Eigen::Index>(p[static_cast<std::size_t>(i)]),
                                       static_cast<Eigen::Index>(p[static_cast<std::size_t>(j)]));
  for (std::size_t k : p) {
    out.ids.push_back(matrix.ids[k]);
    out.labels.push_back(matrix.labels[k]);
    out.order.push_back(matrix.order[k]);
  }
  out.sort_key = metric;
  out.tags = matrix.tags;
  return out;
}

Eigen::VectorXd mean_offdiagonal_similarity(const AffinityMatrix& matrix) {
  const auto n = matrix.size();
  if (n < 2) throw TooFewSamplesError("mean similarity needs at least two images");
  return (matrix.values.rowwise().sum() - matrix.values.diagonal()) / static_cast<double>(n - 1);
}

double quality_confound(const AffinityMatrix& matrix, const QualityTable& quality, Metric metric) {
  const Eigen::VectorXd q = metric_column(matrix, quality, metric);
  if (matrix.size() < 3) throw TooFewSamplesError("quality confound needs at least three images");
  return spearman(q, mean_offdiagonal_similarity(matrix));
}

std::vector<ConfoundEntry> confound_table(const AffinityMatrix& matrix, const QualityTable& quality) {
  std::vector<ConfoundEntry> out;
  for (Metric m : kAllMetrics) {
    ConfoundEntry e{m, std::nullopt, {}};
    try {
      e.rho = quality_confound(matrix, quality, m);
    } catch (const Error& err) {
      e.note = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::same_person: return "same-person";
    case Verdict::distinct_person: return "distinct-person";
    case Verdict::inconclusive: break;
  }
  return "inconclusive";
}

std::optional<Verdict> verdict_from_name(std::string_view name) {
  for (Verdict v : {Verdict::same_person, Verdict::distinct_person, Verdict::inconclusive})
    if (verdict_name(v) == name) return v;
  return std::nullopt;
}

Verdict decide(double overlap_with_genuine, double overlap_with_impostor, const Thresholds& t) {
  if (overlap_with_genuine >= t.tau_same && overlap_with_impostor <= t.tau_diff) return Verdict::same_person;
  if (overlap_with_impostor >= t.tau_same && overlap_with_genuine <= t.tau_diff) return Verdict::distinct_person;
  return Verdict::inconclusive;
}

VerdictReport verdict(const ScoreDistributions& case_scores, const std::optional<ScoreDistributions>& calibration,
                      std::vector<ConfoundEntry> confounds, const Thresholds& thresholds, std::string descriptor) {
  VerdictReport r;
  r.descriptor = std::move(descriptor);
  r.case_scores = case_scores;
  r.calibration = calibration;
  r.confounds = std::move(confounds);
  r.thresholds = thresholds;
  const HistogramSpec& spec = case_scores.histogram;

  if (case_scores.genuine.size() > 0 && case_scores.impostor.size() > 0)
    r.case_genuine_impostor_overlap = overlap_coefficient(case_scores.genuine, case_scores.impostor, spec);
  try {
    r.d_prime = d_prime(case_scores.genuine, case_scores.impostor);
  } catch (const Error& e) {
    r.reasons.push_back(std::string("d' unavailable: ") + e.what());
  }

  if (!calibration) {
    r.reasons.push_back("no calibration population supplied");
    return r;
  }
  if (calibration->histogram.bins != spec.bins || calibration->histogram.lo != spec.lo ||
      calibration->histogram.hi != spec.hi) {
    r.reasons.push_back("calibration histogram settings differ from the case");
    return r;
  }
  if (case_scores.impostor.size() == 0 || calibration->genuine.size() == 0 || calibration->impostor.size() == 0) {
    r.reasons.push_back("empty score sample: overlap undefined");
    return r;
  }
  r.overlap_impostor_vs_calibration_genuine = overlap_coefficient(case_scores.impostor, calibration->genuine, spec);
  r.overlap_impostor_vs_calibration_impostor =
      overlap_coefficient(case_scores.impostor, calibration->impostor, spec);
  r.verdict = decide(*r.overlap_impostor_vs_calibration_genuine, *r.overlap_impostor_vs_calibration_impostor,
                     thresholds);
  if (r.verdict == Verdict::inconclusive) r.reasons.push_back("neither decision rule fired");
  return r;
}

}  // namespace claimcheck
