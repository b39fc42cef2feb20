#pragma once

#include "claimcheck/analysis.hpp"
#include "claimcheck/classifier.hpp"
#include "claimcheck/quality.hpp"
#include "claimcheck/report.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace claimcheck {

/// Everything one `analyze` run needs. Paths in a config file are relative
/// to that file's directory.
struct RunConfig {
  std::filesystem::path case_manifest;
  std::optional<std::filesystem::path> reference_manifest;
  std::optional<std::filesystem::path> calibration_cache;
  std::vector<std::string> descriptors{"baseline"};
  std::filesystem::path preset_dir;
  std::optional<std::filesystem::path> sunglasses_classifier;
  std::optional<std::filesystem::path> gender_classifier;
  QualityConfig quality;
  Thresholds thresholds;
  HistogramSpec histogram;
  std::filesystem::path output_dir = "claimcheck-out";
  int workers = 1;
  bool assume_aligned = false;
};

RunConfig load_run_config(const std::filesystem::path& path);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
/// (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct FaceSet {
  std::vector<AlignedFace> faces;  // manifest order, failures removed
  std::vector<ExcludedImage> excluded;
};

/// Decodes and aligns every manifest entry. Per-image data errors exclude
/// that image and are reported, never dropped silently.
FaceSet prepare_faces(const Manifest& manifest, bool assume_aligned, int workers);

struct LoadedClassifiers {
  std::unique_ptr<AuxClassifier> sunglasses;
  std::unique_ptr<AuxClassifier> gender;

  QualityClassifiers view() const { return {sunglasses.get(), gender.get()}; }
};

LoadedClassifiers load_classifiers(const std::optional<std::filesystem::path>& sunglasses,
                                   const std::optional<std::filesystem::path>& gender);

QualityTable score_faces(const std::vector<AlignedFace>& faces, const QualityClassifiers& classifiers,
                         const QualityConfig& cfg, int workers, std::vector<std::string>* warnings);

/// id,label followed by the eight metric columns; unavailable scores are NA.
void write_quality_csv(const std::vector<AlignedFace>& faces, const QualityTable& quality,
                       const std::filesystem::path& path);

/// source_id_a,source_id_b,label_a,label_b,similarity over unordered pairs.
void write_scores_csv(const AffinityMatrix& matrix, const std::filesystem::path& path);

struct CalibrationCache {
  std::string descriptor;
  int embedding_dim = 0;
  int identities = 0;
  int images = 0;
  ScoreDistributions distributions;
};

nlohmann::json to_json(const CalibrationCache& cache);
CalibrationCache calibration_cache_from_json(const nlohmann::json& j);

/// Subcommands. Each returns the process exit status: 0 success, 2 config
/// error, 3 data error, 4 model error. Diagnostics go to `log`.
int cmd_analyze(const RunConfig& config, std::ostream& log);

struct QualityOptions {
  std::filesystem::path manifest;
  std::filesystem::path out;
  bool assume_aligned = false;
  int workers = 1;
  std::optional<std::filesystem::path> sunglasses_classifier;
  std::optional<std::filesystem::path> gender_classifier;
};
int cmd_quality(const QualityOptions& options, std::ostream& log);

struct CalibrateOptions {
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::string descriptor = "baseline";
  std::filesystem::path preset_dir;
  bool assume_aligned = false;
  int workers = 1;
  HistogramSpec histogram;
};
int cmd_calibrate(const CalibrateOptions& options, std::ostream& log);

/// Re-renders figures from a statistics file written by `analyze`.
int cmd_render(const std::filesystem::path& statistics, const std::filesystem::path& out_dir, std::ostream& log);

/// Command-line entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace claimcheck
