#pragma once

#include "claimcheck/ingest.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace claimcheck {

class AuxClassifier;

enum class Metric {
  brightness,
  face_luminance,
  exposure,
  contrast,
  sharpness,
  sunglasses_absence,
  femininity,
  pose_frontality,
};

inline constexpr std::array<Metric, 8> kAllMetrics{
    Metric::brightness, Metric::face_luminance,     Metric::exposure,   Metric::contrast,
    Metric::sharpness,  Metric::sunglasses_absence, Metric::femininity, Metric::pose_frontality};

std::string_view metric_name(Metric m);
std::optional<Metric> metric_from_name(std::string_view name);

/// Every formula constant of the quality metrics, in one place so that runs
/// can override them from configuration.
struct QualityConfig {
  double exposure_low = 0.10;
  double exposure_high = 0.90;
  double contrast_max_std = 0.5;
  double sharpness_sigma = 2.0;
  double sharpness_normalizer = 0.05;
  int eye_patch_width = 24;
  int eye_patch_height = 16;
  double sunglasses_dark_threshold = 0.25;
};

/// Score per metric; std::nullopt means unavailable.
class QualityScores {
 public:
  std::optional<double>& operator[](Metric m) { return values_[static_cast<std::size_t>(m)]; }
  const std::optional<double>& operator[](Metric m) const {
    return values_[static_cast<std::size_t>(m)];
  }
  static constexpr std::size_t size() { return kAllMetrics.size(); }

 private:
  std::array<std::optional<double>, 8> values_{};
};

struct PoseAngles {
  double yaw = 0.0;    // degrees, negative when the nose moves toward the image-left eye
  double pitch = 0.0;  // degrees, positive when the nose moves toward the mouth line
  double roll = 0.0;   // degrees, eye-line angle relative to the template
};

double brightness(const AlignedFace& face);
double face_luminance(const AlignedFace& face);
double exposure(const AlignedFace& face, const QualityConfig& cfg = {});
double contrast(const AlignedFace& face, const QualityConfig& cfg = {});
double sharpness(const AlignedFace& face, const QualityConfig& cfg = {});
double sunglasses_absence(const AlignedFace& face, const AuxClassifier* classifier = nullptr,
                          const QualityConfig& cfg = {});
std::optional<double> femininity(const AlignedFace& face, const AuxClassifier* classifier = nullptr);
PoseAngles head_pose(const FivePointLandmarks& landmarks);
inline PoseAngles head_pose(const AlignedFace& face) { return head_pose(face.canonical_landmarks); }
double pose_frontality(const PoseAngles& angles);

/// The four face-region triangles used by face_luminance, as landmark triples.
std::array<std::array<Eigen::Vector2d, 3>, 4> luminance_triangles(const FivePointLandmarks& lm);

/// Non-strict point-in-triangle test (points on an edge count as inside).
bool in_triangle(const Eigen::Vector2d& p, const std::array<Eigen::Vector2d, 3>& tri);

struct QualityClassifiers {
  const AuxClassifier* sunglasses = nullptr;
  const AuxClassifier* gender = nullptr;
};

/// Evaluates all eight metrics. Failures of optional classifiers downgrade
/// the metric to unavailable and append a message to `warnings`.
QualityScores score_all(const AlignedFace& face, const QualityClassifiers& classifiers = {},
                        const QualityConfig& cfg = {}, std::vector<std::string>* warnings = nullptr);

}  // namespace claimcheck
