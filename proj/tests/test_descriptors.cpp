#include "doctest.h"
#include "synth.hpp"
#include "testdir.hpp"

#include "claimcheck/classifier.hpp"
#include "claimcheck/descriptors.hpp"
#include "claimcheck/errors.hpp"
#include "claimcheck/quality.hpp"

#include <cstdlib>
#include <fstream>

using namespace claimcheck;
namespace fs = std::filesystem;

namespace {

AlignedFace uniform(std::uint8_t v) {
  return make_aligned_face(RgbImage::filled(kAlignedSize, kAlignedSize, v, v, v), canonical_template(), "u", "a");
}

EmbeddingVector unit(std::vector<double> v) {
  EmbeddingVector e{"t", Eigen::Map<Eigen::VectorXd>(v.data(), v.size()), "x"};
  e.values.normalize();
  return e;
}

/// Block means computed pixel by pixel.
Eigen::VectorXd block_oracle(const LumaPlane& l, int grid) {
  const int b = kAlignedSize / grid;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(grid * grid);
  for (int y = 0; y < kAlignedSize; ++y)
    for (int x = 0; x < kAlignedSize; ++x) v((y / b) * grid + x / b) += l(y, x) / (b * b);
  double m = 0.0;
  for (int k = 0; k < v.size(); ++k) m += v(k);
  m /= static_cast<double>(v.size());
  for (int k = 0; k < v.size(); ++k) v(k) -= m;
  return v / std::sqrt(v.squaredNorm());
}

}  // namespace

TEST_CASE("baseline descriptor") {
  const auto d = load_descriptor(baseline_spec());
  CHECK(d->embedding_dim() == 256);
  CHECK_THROWS_AS(d->embed(uniform(90)), ZeroVectorError);

  synth::Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const AlignedFace f = synth::random_crop(rng);
    bool uniform_blocks = false;
    EmbeddingVector e;
    try {
      e = d->embed(f);
    } catch (const ZeroVectorError&) {
      uniform_blocks = true;
    }
    if (uniform_blocks) continue;
    CHECK(std::abs(e.values.norm() - 1.0) < 1e-6);
    CHECK((e.values - block_oracle(f.luma, 16)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(d->embed(f).values == e.values);
    CHECK(std::abs(cosine(e, d->embed(f)) - 1.0) < 1e-6);
  }

  SUBCASE("offset invariance") {
    Plane8 p(kAlignedSize, kAlignedSize);
    for (int y = 0; y < kAlignedSize; ++y)
      for (int x = 0; x < kAlignedSize; ++x) p(y, x) = static_cast<std::uint8_t>(40 + (x * 3 + y * 5) % 120);
    const AlignedFace a = make_aligned_face(RgbImage::gray(p), canonical_template(), "a", "a");
    const Plane8 q = p + std::uint8_t{60};
    const AlignedFace b = make_aligned_face(RgbImage::gray(q), canonical_template(), "b", "a");
    CHECK((d->embed(a).values - d->embed(b).values).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("other grids") {
    DescriptorSpec s = baseline_spec();
    s.embedding_dim = 64;
    const AlignedFace f = synth::random_crop(rng);
    CHECK((load_descriptor(s)->embed(f).values - block_oracle(f.luma, 8)).cwiseAbs().maxCoeff() < 1e-12);
    s.embedding_dim = 100;
    CHECK_THROWS_AS(load_descriptor(s), ShapeMismatchError);
  }
}

TEST_CASE("cosine") {
  CHECK(cosine(unit({1, 0, 0}), unit({0, 1, 0})) == 0.0);
  CHECK(std::abs(cosine(unit({1, 0, 0}), unit({1, 1, 0})) - 0.70710678) < 1e-6);
  const EmbeddingVector a = unit({0.3, -0.2, 0.9}), b = unit({-0.5, 0.1, 0.4});
  CHECK(cosine(a, b) == cosine(b, a));
  CHECK(cosine(a, a) >= 1.0 - 1e-6);
  EmbeddingVector other = a;
  other.descriptor_name = "u";
  CHECK_THROWS_AS(cosine(a, other), DescriptorMismatchError);
  CHECK_THROWS_AS(cosine(a, unit({1, 0})), DescriptorMismatchError);
}

TEST_CASE("shipped presets") {
  const fs::path dir = CLAIMCHECK_CONFIG_DIR "/descriptors";
  const std::map<std::string, int> dims{
      {"baseline", 256}, {"arcface", 512}, {"sphereface", 512}, {"lightcnn", 256}, {"mobilesqueezenet", 256}};
  for (const auto& [name, dim] : dims) {
    const DescriptorSpec s = find_descriptor_spec(name, dir);
    CHECK(s.name == name);
    CHECK(s.embedding_dim == dim);
    if (name != "baseline") {
      CHECK(s.kind == DescriptorKind::neural_model);
      CHECK(s.model_path.has_value());
    }
  }
  const DescriptorSpec light = find_descriptor_spec("lightcnn", dir);
  CHECK(light.input.order == ChannelOrder::gray);
  CHECK(light.input.width == 128);
  CHECK(find_descriptor_spec("sphereface", dir).input.order == ChannelOrder::bgr);
  CHECK_THROWS_AS(find_descriptor_spec("nosuch", dir), ConfigError);
  CHECK(find_descriptor_spec("baseline", test_dir("empty_presets")).kind == DescriptorKind::baseline);
}

TEST_CASE("neural descriptor from an ONNX file") {
  const DescriptorSpec spec = load_descriptor_spec(fixture("models/block_descriptor_64.json"));
  CHECK(spec.smoke_test.has_value());
  const auto d = load_descriptor(spec);
  synth::Rng rng(3);
  const AlignedFace f = synth::random_crop(rng);
  const EmbeddingVector e = d->embed(f);
  CHECK(e.values.size() == 64);
  CHECK(std::abs(e.values.norm() - 1.0) < 1e-6);
  CHECK((d->embed(f).values - e.values).cwiseAbs().maxCoeff() <= 1e-5);

  CHECK_THROWS_AS(load_descriptor(load_descriptor_spec(fixture("models/block_descriptor_64_tampered.json"))),
                  ModelLoadError);
  CHECK_THROWS_AS(load_descriptor(load_descriptor_spec(fixture("models/pooled_128_as_512.json"))), ShapeMismatchError);

  DescriptorSpec missing = spec;
  missing.model_path = fixture("models/absent.onnx");
  CHECK_THROWS_AS(load_descriptor(missing), ModelLoadError);

  const fs::path junk = test_dir("junk_model") / "junk.onnx";
  std::ofstream(junk) << "not a model";
  missing.model_path = junk;
  CHECK_THROWS_AS(load_descriptor(missing), ModelLoadError);
}

TEST_CASE("preset validation") {
  const fs::path dir = test_dir("presets");
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };
  CHECK_THROWS_AS(load_descriptor_spec(write("a.json", R"({"kind": "neural-model", "embedding_dim": 512})")),
                  ConfigError);
  CHECK_THROWS_AS(load_descriptor_spec(write("b.json", R"({"kind": "magic", "embedding_dim": 8})")), ConfigError);
  CHECK_THROWS_AS(load_descriptor_spec(write("c.json", R"({"kind": "baseline", "embedding_dim": 0})")), ConfigError);
  CHECK_THROWS_AS(load_descriptor_spec(write("d.json", R"({"kind": "baseline", "embedding_dim": 256, "typo": 1})")),
                  ConfigError);
  CHECK_THROWS_AS(load_descriptor_spec(write("e.json", "{")), ConfigError);
  CHECK_THROWS_AS(
      load_descriptor_spec(write("f.json", R"({"kind": "baseline", "embedding_dim": 256, "input": {"order": "rgb"}})")),
      ConfigError);
  const DescriptorSpec s = load_descriptor_spec(write("g.json", R"({"kind": "baseline", "embedding_dim": 64})"));
  CHECK(s.name == "g");
}

TEST_CASE("model directory lookup") {
  const fs::path models = test_dir("model_dir");
  const fs::path presets = test_dir("model_dir_presets");
  fs::copy_file(fixture("models/pooled_128.onnx"), models / "p.onnx");
  std::ofstream(presets / "p.json") << R"({"kind": "neural-model", "embedding_dim": 128, "model_path": "p.onnx"})";
  ::setenv("CLAIMCHECK_MODEL_DIR", models.c_str(), 1);
  const DescriptorSpec s = load_descriptor_spec(presets / "p.json");
  CHECK(*s.model_path == models / "p.onnx");
  CHECK(load_descriptor(s)->embedding_dim() == 128);
  ::unsetenv("CLAIMCHECK_MODEL_DIR");
  CHECK(*load_descriptor_spec(presets / "p.json").model_path == presets / "p.onnx");
}

TEST_CASE("input tensor layout") {
  RgbImage img = RgbImage::filled(kAlignedSize, kAlignedSize, 10, 20, 30);
  img.channels[0](0, 1) = 250;
  const AlignedFace f = make_aligned_face(img, canonical_template(), "t", "a");
  TensorInputSpec spec;
  spec.mean = {10, 20, 30};
  spec.scale = {1, 1, 1};
  Eigen::VectorXf t = make_input_tensor(f, spec);
  CHECK(t.size() == 3 * kAlignedSize * kAlignedSize);
  CHECK(t(1) == 240.0f);
  CHECK(t.cwiseAbs().sum() == 240.0f);
  spec.order = ChannelOrder::bgr;
  spec.mean = {30, 20, 10};
  t = make_input_tensor(f, spec);
  CHECK(t(2 * kAlignedSize * kAlignedSize + 1) == 240.0f);
  spec.order = ChannelOrder::gray;
  spec.mean = {0, 0, 0};
  spec.width = spec.height = 56;
  t = make_input_tensor(f, spec);
  CHECK(t.size() == 56 * 56);
  CHECK(t(56 * 30 + 30) == doctest::Approx(255.0 * luma_of(10, 20, 30)).epsilon(1e-4));
}

TEST_CASE("auxiliary classifiers") {
  const AlignedFace f = uniform(128);
  const auto sun = AuxClassifier::load(fixture("models/sunglasses_const.json"));
  CHECK(sun->probability_of("non_sunglasses", f) == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(sunglasses_absence(f, sun.get()) == doctest::Approx(0.7).epsilon(1e-6));

  const auto gender = AuxClassifier::load(fixture("models/gender_const.json"));
  CHECK(femininity(f, gender.get()).value() == doctest::Approx(0.9).epsilon(1e-6));

  const auto bad = AuxClassifier::load(fixture("models/bad_probabilities.json"));
  CHECK_THROWS_AS(femininity(f, bad.get()), ClassifierIOError);
  CHECK_THROWS_AS(sun->probability_of("female", f), ClassifierIOError);

  std::vector<std::string> warnings;
  const QualityScores s = score_all(f, {sun.get(), bad.get()}, {}, &warnings);
  CHECK(s[Metric::sunglasses_absence].value() == doctest::Approx(0.7).epsilon(1e-6));
  CHECK_FALSE(s[Metric::femininity].has_value());
  CHECK(warnings.size() == 1);

  SUBCASE("image dependent output") {
    const auto mc = AuxClassifier::load(fixture("models/mean_color_gender.json"));
    const AlignedFace red = make_aligned_face(RgbImage::filled(kAlignedSize, kAlignedSize, 250, 0, 0),
                                              canonical_template(), "r", "a");
    const AlignedFace blue = make_aligned_face(RgbImage::filled(kAlignedSize, kAlignedSize, 0, 0, 250),
                                               canonical_template(), "b", "a");
    CHECK(femininity(red, mc.get()).value() > 0.9);
    CHECK(femininity(blue, mc.get()).value() < 0.1);
  }

  SUBCASE("config errors") {
    const fs::path dir = test_dir("classifier_cfg");
    std::ofstream(dir / "a.json") << R"({"model_path": "x.onnx"})";
    CHECK_THROWS_AS(AuxClassifier::load(dir / "a.json"), ConfigError);
    std::ofstream(dir / "b.json") << R"({"model_path": "x.onnx", "classes": ["a", "b"]})";
    CHECK_THROWS_AS(AuxClassifier::load(dir / "b.json"), ModelLoadError);
    std::ofstream(dir / "c.json") << R"({"model_path": "x.onnx", "classes": ["a", 3]})";
    CHECK_THROWS_AS(AuxClassifier::load(dir / "c.json"), ConfigError);
    CHECK_THROWS_AS(AuxClassifier::load(dir / "none.json"), ConfigError);
  }
}

TEST_CASE("shipped classifier examples parse") {
  for (const char* name : {"sunglasses.json", "gender.json"}) {
    // The weights are not shipped, so loading stops at the model file.
    CHECK_THROWS_AS(AuxClassifier::load(fs::path(CLAIMCHECK_CONFIG_DIR "/classifiers") / name), ModelLoadError);
  }
}
