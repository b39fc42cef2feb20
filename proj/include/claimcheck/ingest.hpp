#pragma once

#include "claimcheck/image.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace claimcheck {

inline constexpr int kAlignedSize = 112;
inline constexpr int kMinImageSide = 16;

/// Five facial points in pixel coordinates. "left" and "right" are image-left
/// and image-right, so right_eye.x > left_eye.x for an upright face.
struct FivePointLandmarks {
  Eigen::Vector2d left_eye;
  Eigen::Vector2d right_eye;
  Eigen::Vector2d nose_tip;
  Eigen::Vector2d left_mouth;
  Eigen::Vector2d right_mouth;

  /// Columns in the order above.
  Eigen::Matrix<double, 2, 5> as_matrix() const;
  static FivePointLandmarks from_matrix(const Eigen::Matrix<double, 2, 5>& m);
};

/// Five-point template of the 112x112 crop used by the ArcFace family.
const FivePointLandmarks& canonical_template();

struct ManifestEntry {
  std::filesystem::path image_path;  // absolute or relative to the working dir
  std::string id;                    // path as written in the manifest
  std::string label;
  std::optional<FivePointLandmarks> landmarks;
};

enum class ManifestKind {
  case_set,   // at most two identity tags
  reference,  // any number of identity tags
};

struct Manifest {
  std::string case_name;
  std::optional<std::filesystem::path> reference;
  std::vector<ManifestEntry> entries;

  /// Distinct labels in first-appearance order.
  std::vector<std::string> tags() const;
};

/// Reads and validates a manifest. Relative image paths resolve against the
/// manifest's directory.
Manifest load_manifest(const std::filesystem::path& path, ManifestKind kind = ManifestKind::case_set);

struct ImageSample {
  std::string id;
  RgbImage pixels;
  std::string label;
  std::optional<FivePointLandmarks> landmarks;
};

ImageSample decode_image(const std::filesystem::path& path, const std::string& label,
                         const std::optional<FivePointLandmarks>& landmarks,
                         std::string id = {});

struct AlignedFace {
  RgbImage pixels;  // kAlignedSize x kAlignedSize
  LumaPlane luma;
  FivePointLandmarks canonical_landmarks;
  std::string source_id;
  std::string label;
};

/// Builds an AlignedFace from a ready 112x112 raster.
AlignedFace make_aligned_face(RgbImage pixels, const FivePointLandmarks& landmarks,
                              std::string source_id, std::string label);

/// Least-squares similarity transform (homogeneous 3x3) taking `from` onto `to`.
Eigen::Matrix3d estimate_similarity(const FivePointLandmarks& from, const FivePointLandmarks& to);

/// Output pixel p samples the input at transform^-1 p.
RgbImage warp_similarity(const RgbImage& image, const Eigen::Matrix3d& transform, int rows, int cols);

AlignedFace align_face(const ImageSample& sample);

/// Tight-crop path: resize to 112x112 and assign the template landmarks.
AlignedFace assume_aligned(const ImageSample& sample);

/// View of an aligned crop as a sample carrying its crop-space landmarks.
ImageSample as_sample(const AlignedFace& face);

}  // namespace claimcheck
