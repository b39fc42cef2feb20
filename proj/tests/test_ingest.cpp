#include "doctest.h"
#include "synth.hpp"
#include "testdir.hpp"

#include "claimcheck/errors.hpp"
#include "claimcheck/image_io.hpp"
#include "claimcheck/ingest.hpp"

#include <Eigen/Geometry>

#include <fstream>
#include <numbers>

using namespace claimcheck;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kPoints = R"([[30, 40], [60, 40], [45, 55], [35, 70], [55, 70]])";

std::string entry(const std::string& path, const std::string& label, const std::string& lm = kPoints) {
  return R"({"path": ")" + path + R"(", "label": ")" + label + R"(", "landmarks": )" + lm + "}";
}

}  // namespace

TEST_CASE("manifest loading") {
  const fs::path dir = test_dir("manifest");
  const fs::path m = dir / "m.json";

  SUBCASE("well formed") {
    write_text(m, R"({"reference": "ref.json", "entries": [)" + entry("a/1.png", "real") + "," +
                      entry("a/2.png", "double") + "," + R"({"path": "b.png", "label": "real"})" + "]}");
    const Manifest man = load_manifest(m);
    CHECK(man.case_name == "m");
    CHECK(man.entries.size() == 3);
    CHECK(man.entries[0].image_path == dir / "a/1.png");
    CHECK(man.entries[0].id == "a/1.png");
    CHECK(man.entries[0].landmarks->nose_tip == Eigen::Vector2d(45, 55));
    CHECK_FALSE(man.entries[2].landmarks.has_value());
    CHECK(man.reference == dir / "ref.json");
    CHECK(man.tags() == std::vector<std::string>{"real", "double"});
  }
  SUBCASE("sixteen and fourteen") {
    std::string body = R"({"entries": [)";
    for (int i = 0; i < 30; ++i) {
      if (i > 0) body += ",";
      body += entry("img" + std::to_string(i) + ".png", i < 16 ? "real" : "double");
    }
    write_text(m, body + "]}");
    const Manifest man = load_manifest(m);
    CHECK(man.entries.size() == 30);
    CHECK(man.tags() == std::vector<std::string>{"real", "double"});
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_manifest(dir / "nope.json"), ParseError); }
  SUBCASE("bad json") {
    write_text(m, "{entries: [");
    CHECK_THROWS_AS(load_manifest(m), ParseError);
  }
  SUBCASE("missing label") {
    write_text(m, R"({"entries": [{"path": "x.png"}]})");
    CHECK_THROWS_AS(load_manifest(m), ParseError);
  }
  SUBCASE("short landmark list") {
    write_text(m, R"({"entries": [)" + entry("x.png", "a", "[[1, 2]]") + "]}");
    CHECK_THROWS_AS(load_manifest(m), ParseError);
  }
  SUBCASE("empty") {
    write_text(m, R"({"entries": []})");
    CHECK_THROWS_AS(load_manifest(m), ValidationError);
  }
  SUBCASE("duplicate paths") {
    write_text(m, R"({"entries": [)" + entry("x.png", "a") + "," + entry("./x.png", "b") + "]}");
    CHECK_THROWS_AS(load_manifest(m), ValidationError);
  }
  SUBCASE("three tags") {
    write_text(m, R"({"entries": [)" + entry("x.png", "a") + "," + entry("y.png", "b") + "," + entry("z.png", "c") +
                      "]}");
    CHECK_THROWS_AS(load_manifest(m), ValidationError);
    CHECK(load_manifest(m, ManifestKind::reference).tags().size() == 3);
  }
  SUBCASE("negative landmark") {
    write_text(m, R"({"entries": [)" + entry("x.png", "a", "[[-3, 40], [60, 40], [45, 55], [35, 70], [55, 70]]") +
                      "]}");
    CHECK_THROWS_AS(load_manifest(m), ValidationError);
  }
  SUBCASE("mirrored eyes") {
    write_text(m, R"({"entries": [)" + entry("x.png", "a", "[[60, 40], [30, 40], [45, 55], [35, 70], [55, 70]]") +
                      "]}");
    CHECK_THROWS_AS(load_manifest(m), ValidationError);
  }
}

TEST_CASE("decode") {
  const fs::path dir = test_dir("decode");
  write_png(RgbImage::filled(40, 30, 10, 20, 30), dir / "ok.png");
  write_png(RgbImage::filled(12, 30, 0, 0, 0), dir / "small.png");
  write_text(dir / "corrupt.png", "not an image");

  const ImageSample s = decode_image(dir / "ok.png", "a", std::nullopt, "ok");
  CHECK(s.pixels.rows() == 40);
  CHECK(s.pixels.cols() == 30);
  CHECK(s.pixels.channels[0](5, 5) == 10);
  CHECK(s.pixels.channels[2](5, 5) == 30);
  CHECK_THROWS_AS(decode_image(dir / "small.png", "a", std::nullopt), TooSmallError);
  CHECK_THROWS_AS(decode_image(dir / "corrupt.png", "a", std::nullopt), DecodeError);
  CHECK_THROWS_AS(decode_image(dir / "absent.png", "a", std::nullopt), DecodeError);

  FivePointLandmarks far = canonical_template();
  far.right_mouth.x() = 31.0;
  far.right_eye.x() = 29.5;
  CHECK_THROWS_AS(decode_image(dir / "ok.png", "a", far), ValidationError);
}

TEST_CASE("png and jpeg round trip") {
  const fs::path dir = test_dir("codec");
  synth::Rng rng(1);
  const AlignedFace f = synth::random_crop(rng);
  write_png(f.pixels, dir / "f.png");
  CHECK(read_image(dir / "f.png") == f.pixels);
  write_jpeg(f.pixels, dir / "f.jpg");
  CHECK(read_image(dir / "f.jpg").rows() == kAlignedSize);
}

TEST_CASE("similarity estimate recovers a known transform") {
  const FivePointLandmarks t = canonical_template();
  const double theta = 17.0 * std::numbers::pi / 180.0;
  const Eigen::Matrix2d a = 1.7 * Eigen::Rotation2Dd(theta).toRotationMatrix();
  const Eigen::Vector2d shift(40.0, -12.0);
  Eigen::Matrix<double, 2, 5> src = t.as_matrix();
  for (int k = 0; k < 5; ++k) src.col(k) = a * src.col(k) + shift;
  const Eigen::Matrix3d m = estimate_similarity(FivePointLandmarks::from_matrix(src), t);
  CHECK((m.topLeftCorner<2, 2>() - a.inverse()).norm() < 1e-9);
  CHECK((m.topLeftCorner<2, 2>() * shift + m.topRightCorner<2, 1>()).norm() < 1e-9);

  FivePointLandmarks flat = t;
  for (Eigen::Vector2d* p : {&flat.left_eye, &flat.right_eye, &flat.nose_tip, &flat.left_mouth, &flat.right_mouth})
    p->y() = 50.0;
  CHECK_THROWS_AS(estimate_similarity(flat, t), DegenerateLandmarksError);
}

TEST_CASE("alignment of a synthetic capture") {
  const synth::Identity id = synth::make_identity(42);
  synth::Capture cap;
  cap.rotation_deg = 9.0;
  cap.scale = 1.3;
  cap.shift_x = 4.0;
  cap.landmark_jitter = 0.0;
  cap.sensor_noise = 0.0;
  const synth::SynthImage img = synth::render_face(id, cap);
  const ImageSample s{"c", img.image, "a", img.landmarks};
  const AlignedFace f = align_face(s);
  CHECK(f.pixels.rows() == kAlignedSize);
  CHECK((f.canonical_landmarks.as_matrix() - canonical_template().as_matrix()).norm() < 1e-6);

  cap.rotation_deg = 0.0;
  cap.scale = 1.0;
  cap.shift_x = cap.shift_y = 0.0;
  cap.width = cap.height = kAlignedSize;
  const RgbImage direct = synth::render_face(id, cap).image;
  const Eigen::ArrayXXd diff =
      f.luma.cast<double>() - luma(direct).cast<double>();
  // Interior mean difference, away from resampled borders.
  CHECK(diff.block(20, 20, 72, 72).abs().mean() < 0.03);

  ImageSample bare = s;
  bare.landmarks.reset();
  CHECK_THROWS_AS(align_face(bare), MissingLandmarksError);
}

TEST_CASE("assume aligned") {
  const ImageSample big{"b", RgbImage::filled(224, 224, 50, 60, 70), "a", std::nullopt};
  const AlignedFace f = assume_aligned(big);
  CHECK(f.pixels.rows() == kAlignedSize);
  CHECK(f.pixels.channels[1](10, 10) == 60);
  CHECK(f.canonical_landmarks.as_matrix() == canonical_template().as_matrix());
  const ImageSample exact{"e", RgbImage::filled(112, 112, 1, 2, 3), "a", std::nullopt};
  CHECK(assume_aligned(exact).pixels == exact.pixels);
  CHECK(as_sample(f).landmarks.has_value());
}
