#include "claimcheck/quality.hpp"

#include "claimcheck/classifier.hpp"
#include "claimcheck/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace claimcheck {

namespace {

constexpr std::array<std::string_view, 8> kMetricNames{
    "brightness", "face_luminance",     "exposure",   "contrast",
    "sharpness",  "sunglasses_absence", "femininity", "pose_frontality"};

constexpr double kDeg = 180.0 / std::numbers::pi;

double mean_in_triangle(const LumaPlane& luma, const std::array<Eigen::Vector2d, 3>& tri) {
  double lo_x = tri[0].x(), hi_x = tri[0].x(), lo_y = tri[0].y(), hi_y = tri[0].y();
  for (const auto& p : tri) {
    lo_x = std::min(lo_x, p.x());
    hi_x = std::max(hi_x, p.x());
    lo_y = std::min(lo_y, p.y());
    hi_y = std::max(hi_y, p.y());
  }
  const auto x0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(lo_x)));
  const auto x1 = std::min<Eigen::Index>(luma.cols() - 1, static_cast<Eigen::Index>(std::floor(hi_x)));
  const auto y0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(lo_y)));
  const auto y1 = std::min<Eigen::Index>(luma.rows() - 1, static_cast<Eigen::Index>(std::floor(hi_y)));
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index y = y0; y <= y1; ++y)
    for (Eigen::Index x = x0; x <= x1; ++x)
      if (in_triangle(Eigen::Vector2d(static_cast<double>(x), static_cast<double>(y)), tri)) {
        sum += luma(y, x);
        ++count;
      }
  if (count == 0) throw EmptyRegionError("face-luminance triangle covers no pixel centers");
  return sum / static_cast<double>(count);
}

struct PoseFrame {
  double roll;       // radians, eye-line angle
  double asymmetry;  // nose offset from the eye midpoint, in half inter-ocular units
  double height;     // nose depth below the eye line as a fraction of the eye-to-mouth span
};

PoseFrame pose_frame(const FivePointLandmarks& lm) {
  const Eigen::Vector2d eyes = lm.right_eye - lm.left_eye;
  const double interocular = eyes.norm();
  if (!(interocular > 1e-9)) throw DegenerateLandmarksError("eye landmarks coincide");
  const double roll = std::atan2(eyes.y(), eyes.x());
  const Eigen::Rotation2Dd derotate(-roll);
  const Eigen::Vector2d eye_mid = 0.5 * (lm.left_eye + lm.right_eye);
  const Eigen::Vector2d nose = derotate * (lm.nose_tip - eye_mid);
  const Eigen::Vector2d mouth = derotate * (0.5 * (lm.left_mouth + lm.right_mouth) - eye_mid);
  if (!(mouth.y() > 1e-9)) throw DegenerateLandmarksError("mouth line is not below the eye line");
  return {roll, nose.x() / (0.5 * interocular), nose.y() / mouth.y()};
}

}  // namespace

std::string_view metric_name(Metric m) { return kMetricNames[static_cast<std::size_t>(m)]; }

std::optional<Metric> metric_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i)
    if (kMetricNames[i] == name) return kAllMetrics[i];
  return std::nullopt;
}

double brightness(const AlignedFace& face) { return face.luma.mean(); }

std::array<std::array<Eigen::Vector2d, 3>, 4> luminance_triangles(const FivePointLandmarks& lm) {
  return {{{lm.left_eye, lm.right_eye, lm.nose_tip},
           {lm.left_eye, lm.nose_tip, lm.left_mouth},
           {lm.right_eye, lm.nose_tip, lm.right_mouth},
           {lm.left_mouth, lm.right_mouth, lm.nose_tip}}};
}

bool in_triangle(const Eigen::Vector2d& p, const std::array<Eigen::Vector2d, 3>& tri) {
  auto edge = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
  };
  const double d0 = edge(tri[0], tri[1]);
  const double d1 = edge(tri[1], tri[2]);
  const double d2 = edge(tri[2], tri[0]);
  const bool has_neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
  const bool has_pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
  return !(has_neg && has_pos);
}

double face_luminance(const AlignedFace& face) {
  double total = 0.0;
  for (const auto& tri : luminance_triangles(face.canonical_landmarks))
    total += mean_in_triangle(face.luma, tri);
  return std::clamp(total / 4.0, 0.0, 1.0);
}

double exposure(const AlignedFace& face, const QualityConfig& cfg) {
  const auto mid = (face.luma >= cfg.exposure_low && face.luma <= cfg.exposure_high).count();
  return static_cast<double>(mid) / static_cast<double>(face.luma.size());
}

double contrast(const AlignedFace& face, const QualityConfig& cfg) {
  const double mean = face.luma.mean();
  const double variance = (face.luma - mean).square().mean();
  return std::clamp(std::sqrt(variance) / cfg.contrast_max_std, 0.0, 1.0);
}

double sharpness(const AlignedFace& face, const QualityConfig& cfg) {
  const LumaPlane residual = face.luma - gaussian_blur(face.luma, cfg.sharpness_sigma);
  return std::min(1.0, residual.abs().mean() / cfg.sharpness_normalizer);
}

double sunglasses_absence(const AlignedFace& face, const AuxClassifier* classifier,
                          const QualityConfig& cfg) {
  if (classifier != nullptr) return classifier->probability_of("non_sunglasses", face);
  Eigen::Index bright = 0;
  Eigen::Index total = 0;
  for (const Eigen::Vector2d& eye : {face.canonical_landmarks.left_eye, face.canonical_landmarks.right_eye}) {
    const long x0 = std::lround(eye.x() - cfg.eye_patch_width / 2.0);
    const long y0 = std::lround(eye.y() - cfg.eye_patch_height / 2.0);
    for (long y = std::max(0L, y0); y < std::min<long>(face.luma.rows(), y0 + cfg.eye_patch_height); ++y)
      for (long x = std::max(0L, x0); x < std::min<long>(face.luma.cols(), x0 + cfg.eye_patch_width); ++x) {
        ++total;
        if (face.luma(y, x) > cfg.sunglasses_dark_threshold) ++bright;
      }
  }
  if (total == 0) throw EmptyRegionError("eye patches fall outside the crop");
  return static_cast<double>(bright) / static_cast<double>(total);
}

std::optional<double> femininity(const AlignedFace& face, const AuxClassifier* classifier) {
  if (classifier == nullptr) return std::nullopt;
  return classifier->probability_of("female", face);
}

PoseAngles head_pose(const FivePointLandmarks& landmarks) {
  static const PoseFrame reference = pose_frame(canonical_template());
  const PoseFrame f = pose_frame(landmarks);

  double roll = (f.roll - reference.roll) * kDeg;
  if (roll > 180.0) roll -= 360.0;
  if (roll < -180.0) roll += 360.0;

  const double yaw = std::asin(std::clamp(f.asymmetry - reference.asymmetry, -1.0, 1.0)) * kDeg;

  const double dh = f.height - reference.height;
  const double span = dh < 0.0 ? reference.height : 1.0 - reference.height;
  const double pitch = std::asin(std::clamp(dh / span, -1.0, 1.0)) * kDeg;
  return {yaw, pitch, roll};
}

double pose_frontality(const PoseAngles& angles) {
  return std::max(0.0, std::cos(angles.yaw / kDeg) * std::cos(angles.pitch / kDeg));
}

QualityScores score_all(const AlignedFace& face, const QualityClassifiers& classifiers,
                        const QualityConfig& cfg, std::vector<std::string>* warnings) {
  auto warn = [&](Metric m, const std::exception& e) {
    if (warnings != nullptr)
      warnings->push_back(face.source_id + ": " + std::string(metric_name(m)) + " unavailable (" + e.what() + ")");
  };
  auto guarded = [&](Metric m, auto&& fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const Error& e) {
      warn(m, e);
      return std::nullopt;
    }
  };

  QualityScores s;
  s[Metric::brightness] = brightness(face);
  s[Metric::face_luminance] = guarded(Metric::face_luminance, [&] { return face_luminance(face); });
  s[Metric::exposure] = exposure(face, cfg);
  s[Metric::contrast] = contrast(face, cfg);
  s[Metric::sharpness] = sharpness(face, cfg);
  s[Metric::sunglasses_absence] = guarded(Metric::sunglasses_absence,
                                          [&] { return sunglasses_absence(face, classifiers.sunglasses, cfg); });
  s[Metric::femininity] = guarded(Metric::femininity, [&] { return femininity(face, classifiers.gender); });
  s[Metric::pose_frontality] =
      guarded(Metric::pose_frontality, [&] { return pose_frontality(head_pose(face)); });
  return s;
}

}  // namespace claimcheck
