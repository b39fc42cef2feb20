#include "claimcheck/ingest.hpp"

#include "claimcheck/errors.hpp"
#include "claimcheck/image_io.hpp"

#include <Eigen/Geometry>
#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace claimcheck {

namespace fs = std::filesystem;
using json = nlohmann::json;

Eigen::Matrix<double, 2, 5> FivePointLandmarks::as_matrix() const {
  Eigen::Matrix<double, 2, 5> m;
  m << left_eye, right_eye, nose_tip, left_mouth, right_mouth;
  return m;
}

FivePointLandmarks FivePointLandmarks::from_matrix(const Eigen::Matrix<double, 2, 5>& m) {
  return {m.col(0), m.col(1), m.col(2), m.col(3), m.col(4)};
}

const FivePointLandmarks& canonical_template() {
  static const FivePointLandmarks tmpl{
      {38.2946, 51.6963}, {73.5318, 51.5014}, {56.0252, 71.7366},
      {41.5493, 92.3655}, {70.7299, 92.2041}};
  return tmpl;
}

std::vector<std::string> Manifest::tags() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (std::find(out.begin(), out.end(), e.label) == out.end()) out.push_back(e.label);
  return out;
}

namespace {

FivePointLandmarks parse_landmarks(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 5)
    throw ParseError(where + ": landmarks must be an array of five [x, y] points");
  Eigen::Matrix<double, 2, 5> m;
  for (int k = 0; k < 5; ++k) {
    const json& p = j[static_cast<std::size_t>(k)];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ParseError(where + ": landmark " + std::to_string(k) + " is not an [x, y] pair");
    m(0, k) = p[0].get<double>();
    m(1, k) = p[1].get<double>();
  }
  if (!m.allFinite()) throw ValidationError(where + ": non-finite landmark");
  if ((m.array() < 0.0).any()) throw ValidationError(where + ": landmark out of bounds");
  FivePointLandmarks lm = FivePointLandmarks::from_matrix(m);
  if (!(lm.right_eye.x() > lm.left_eye.x()))
    throw ValidationError(where + ": right_eye.x must exceed left_eye.x");
  return lm;
}

void check_bounds(const FivePointLandmarks& lm, const RgbImage& image, const std::string& where) {
  const Eigen::Matrix<double, 2, 5> m = lm.as_matrix();
  const double max_x = static_cast<double>(image.cols() - 1);
  const double max_y = static_cast<double>(image.rows() - 1);
  if ((m.row(0).array() < 0.0).any() || (m.row(0).array() > max_x).any() ||
      (m.row(1).array() < 0.0).any() || (m.row(1).array() > max_y).any())
    throw ValidationError(where + ": landmark out of image bounds");
}

}  // namespace

Manifest load_manifest(const fs::path& path, ManifestKind kind) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(path.string() + ": manifest must be a JSON object");
  const fs::path base = path.parent_path();

  Manifest m;
  if (auto it = doc.find("case_name"); it != doc.end()) {
    if (!it->is_string()) throw ParseError(path.string() + ": case_name must be a string");
    m.case_name = it->get<std::string>();
  } else {
    m.case_name = path.stem().string();
  }
  if (auto it = doc.find("reference"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(path.string() + ": reference must be a path string");
    m.reference = base / it->get<std::string>();
  }
  const auto entries = doc.find("entries");
  if (entries == doc.end() || !entries->is_array())
    throw ParseError(path.string() + ": missing entries array");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const json& e = (*entries)[i];
    const std::string where = path.string() + " entry " + std::to_string(i);
    if (!e.is_object() || !e.contains("path") || !e["path"].is_string() || !e.contains("label") ||
        !e["label"].is_string())
      throw ParseError(where + ": entries need string fields path and label");
    ManifestEntry entry;
    entry.id = e["path"].get<std::string>();
    entry.image_path = base / entry.id;
    entry.label = e["label"].get<std::string>();
    if (entry.label.empty()) throw ValidationError(where + ": empty label");
    if (auto lm = e.find("landmarks"); lm != e.end() && !lm->is_null())
      entry.landmarks = parse_landmarks(*lm, where);
    const std::string key = entry.image_path.lexically_normal().string();
    if (!seen.insert(key).second) throw ValidationError(where + ": duplicate image path " + entry.id);
    m.entries.push_back(std::move(entry));
  }
  if (m.entries.empty()) throw ValidationError(path.string() + ": manifest has no entries");
  if (kind == ManifestKind::case_set && m.tags().size() > 2)
    throw ValidationError(path.string() + ": a case manifest may carry at most two identity tags");
  return m;
}

ImageSample decode_image(const fs::path& path, const std::string& label,
                         const std::optional<FivePointLandmarks>& landmarks, std::string id) {
  ImageSample s;
  s.pixels = read_image(path);
  if (s.pixels.rows() < kMinImageSide || s.pixels.cols() < kMinImageSide)
    throw TooSmallError(path.string() + " is " + std::to_string(s.pixels.cols()) + "x" +
                        std::to_string(s.pixels.rows()) + ", minimum side is " +
                        std::to_string(kMinImageSide));
  if (landmarks) check_bounds(*landmarks, s.pixels, path.string());
  s.id = id.empty() ? path.string() : std::move(id);
  s.label = label;
  s.landmarks = landmarks;
  return s;
}

AlignedFace make_aligned_face(RgbImage pixels, const FivePointLandmarks& landmarks,
                              std::string source_id, std::string label) {
  AlignedFace f;
  f.luma = luma(pixels);
  f.pixels = std::move(pixels);
  f.canonical_landmarks = landmarks;
  f.source_id = std::move(source_id);
  f.label = std::move(label);
  return f;
}

Eigen::Matrix3d estimate_similarity(const FivePointLandmarks& from, const FivePointLandmarks& to) {
  const Eigen::Matrix<double, 2, 5> src = from.as_matrix();
  const Eigen::Matrix<double, 2, 5> centered = src.colwise() - src.rowwise().mean();
  const Eigen::JacobiSVD<Eigen::Matrix<double, 2, 5>> svd(centered);
  const Eigen::Vector2d sv = svd.singularValues();
  // Collinear or coincident points leave the rotation/scale underdetermined.
  if (sv(0) < 1e-9 || sv(1) < 1e-6 * sv(0))
    throw DegenerateLandmarksError("landmarks are collinear or coincident");
  return Eigen::umeyama(src, to.as_matrix(), true);
}

RgbImage warp_similarity(const RgbImage& image, const Eigen::Matrix3d& transform, int rows, int cols) {
  const Eigen::Matrix3d inv = transform.inverse();
  RgbImage out(rows, cols);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      const Eigen::Vector3d src = inv * Eigen::Vector3d(x, y, 1.0);
      for (int c = 0; c < 3; ++c) {
        const double v = sample_bilinear(image.channels[c], src.x(), src.y());
        out.channels[c](y, x) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  return out;
}

AlignedFace align_face(const ImageSample& sample) {
  if (!sample.landmarks)
    throw MissingLandmarksError(sample.id + " has no landmarks (use assume-aligned mode for tight crops)");
  const Eigen::Matrix3d t = estimate_similarity(*sample.landmarks, canonical_template());
  RgbImage crop = warp_similarity(sample.pixels, t, kAlignedSize, kAlignedSize);
  const Eigen::Matrix<double, 2, 5> mapped =
      (t.topLeftCorner<2, 2>() * sample.landmarks->as_matrix()).colwise() + t.topRightCorner<2, 1>();
  return make_aligned_face(std::move(crop), FivePointLandmarks::from_matrix(mapped), sample.id,
                           sample.label);
}

AlignedFace assume_aligned(const ImageSample& sample) {
  RgbImage crop = (sample.pixels.rows() == kAlignedSize && sample.pixels.cols() == kAlignedSize)
                      ? sample.pixels
                      : resize_bilinear(sample.pixels, kAlignedSize, kAlignedSize);
  return make_aligned_face(std::move(crop), canonical_template(), sample.id, sample.label);
}

ImageSample as_sample(const AlignedFace& face) {
  return {face.source_id, face.pixels, face.label, face.canonical_landmarks};
}

}  // namespace claimcheck
