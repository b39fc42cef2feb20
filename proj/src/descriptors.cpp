#include "claimcheck/descriptors.hpp"

#include "claimcheck/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

namespace claimcheck {

namespace fs = std::filesystem;

namespace {

int baseline_grid(int embedding_dim) {
  const int grid = static_cast<int>(std::lround(std::sqrt(static_cast<double>(embedding_dim))));
  if (grid <= 0 || grid * grid != embedding_dim || kAlignedSize % grid != 0)
    throw ShapeMismatchError("baseline embedding_dim must be g*g with g dividing " +
                             std::to_string(kAlignedSize) + ", got " + std::to_string(embedding_dim));
  return grid;
}

}  // namespace

DescriptorSpec baseline_spec() { return {"baseline", DescriptorKind::baseline, std::nullopt, 256, {}, std::nullopt}; }

DescriptorSpec load_descriptor_spec(const fs::path& preset_path) {
  std::ifstream in(preset_path);
  if (!in) throw ConfigError("cannot open descriptor preset " + preset_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(preset_path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(preset_path.string() + ": preset must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (key != "name" && key != "kind" && key != "embedding_dim" && key != "model_path" && key != "input" &&
        key != "smoke_test" && key != "source" && key != "notes")
      throw ConfigError(preset_path.string() + ": unknown key '" + key + "'");
  DescriptorSpec spec;
  spec.name = doc.value("name", preset_path.stem().string());
  const std::string kind = doc.value("kind", "neural-model");
  if (kind == "baseline") {
    spec.kind = DescriptorKind::baseline;
  } else if (kind == "neural-model") {
    spec.kind = DescriptorKind::neural_model;
  } else {
    throw ConfigError(preset_path.string() + ": unknown descriptor kind '" + kind + "'");
  }
  spec.embedding_dim = doc.value("embedding_dim", 0);
  if (spec.embedding_dim <= 0) throw ConfigError(preset_path.string() + ": embedding_dim must be positive");
  if (auto it = doc.find("model_path"); it != doc.end() && it->is_string())
    spec.model_path = resolve_model_path(it->get<std::string>(), preset_path.parent_path());
  if (spec.kind == DescriptorKind::neural_model && !spec.model_path)
    throw ConfigError(preset_path.string() + ": neural-model presets need model_path");
  spec.input = parse_input_spec(doc.value("input", nlohmann::json{}));
  spec.smoke_test = parse_smoke_test(doc.value("smoke_test", nlohmann::json{}));
  return spec;
}

fs::path default_preset_dir() {
  if (const char* env = std::getenv("CLAIMCHECK_PRESET_DIR"); env != nullptr && *env != '\0') return env;
#ifdef CLAIMCHECK_DEFAULT_PRESET_DIR
  return CLAIMCHECK_DEFAULT_PRESET_DIR;
#else
  return "config/descriptors";
#endif
}

DescriptorSpec find_descriptor_spec(const std::string& name_or_path, const fs::path& preset_dir) {
  const fs::path as_path(name_or_path);
  if (as_path.extension() == ".json") return load_descriptor_spec(as_path);
  const fs::path preset = preset_dir / (name_or_path + ".json");
  if (fs::exists(preset)) return load_descriptor_spec(preset);
  if (name_or_path == "baseline") return baseline_spec();
  throw ConfigError("unknown descriptor preset '" + name_or_path + "' (looked in " + preset_dir.string() + ")");
}

Descriptor::Descriptor(DescriptorSpec spec, std::unique_ptr<ModelRunner> runner)
    : spec_(std::move(spec)), runner_(std::move(runner)) {
  if (spec_.kind == DescriptorKind::baseline) {
    baseline_grid(spec_.embedding_dim);
  } else if (!runner_) {
    throw ModelLoadError("descriptor '" + spec_.name + "' has no model");
  }
}

Eigen::VectorXd baseline_features(const LumaPlane& luma, int grid) {
  const Eigen::Index block_rows = luma.rows() / grid;
  const Eigen::Index block_cols = luma.cols() / grid;
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid) * grid);
  for (int by = 0; by < grid; ++by)
    for (int bx = 0; bx < grid; ++bx)
      v(by * grid + bx) = luma.block(by * block_rows, bx * block_cols, block_rows, block_cols).mean();
  v.array() -= v.mean();
  return v;
}

Eigen::VectorXd Descriptor::raw_features(const AlignedFace& face) const {
  if (spec_.kind == DescriptorKind::baseline)
    return baseline_features(face.luma, baseline_grid(spec_.embedding_dim));
  const Eigen::VectorXf tensor = make_input_tensor(face, spec_.input);
  Eigen::VectorXf out;
  {
    std::lock_guard lock(mutex_);
    out = runner_->forward(tensor, spec_.input);
  }
  if (out.size() != spec_.embedding_dim)
    throw InferenceError(spec_.name + ": model produced " + std::to_string(out.size()) +
                         " values, expected " + std::to_string(spec_.embedding_dim));
  return out.cast<double>();
}

EmbeddingVector Descriptor::embed(const AlignedFace& face) const {
  Eigen::VectorXd v = raw_features(face);
  const double norm = v.norm();
  if (!std::isfinite(norm)) throw InferenceError(spec_.name + ": non-finite embedding for " + face.source_id);
  if (norm < 1e-12) throw ZeroVectorError(spec_.name + ": zero embedding for " + face.source_id);
  return {spec_.name, v / norm, face.source_id};
}

std::unique_ptr<Descriptor> load_descriptor(const DescriptorSpec& spec) {
  if (spec.kind == DescriptorKind::baseline) return std::make_unique<Descriptor>(spec);
  if (!spec.model_path) throw ModelLoadError("descriptor '" + spec.name + "' has no model_path");
  std::unique_ptr<ModelRunner> runner = load_onnx_model(*spec.model_path);
  const Eigen::VectorXf probe = Eigen::VectorXf::Constant(
      static_cast<Eigen::Index>(spec.input.channels()) * spec.input.height * spec.input.width,
      spec.smoke_test ? static_cast<float>(spec.smoke_test->input_fill) : 0.0f);
  Eigen::VectorXf out;
  try {
    out = runner->forward(probe, spec.input);
  } catch (const InferenceError& e) {
    throw ShapeMismatchError(spec.name + ": probe inference failed: " + e.what());
  }
  if (out.size() != spec.embedding_dim)
    throw ShapeMismatchError(spec.name + ": model " + spec.model_path->string() + " outputs " +
                             std::to_string(out.size()) + " values but the preset declares " +
                             std::to_string(spec.embedding_dim));
  if (spec.smoke_test) check_smoke_test(*spec.smoke_test, out, spec.name);
  return std::make_unique<Descriptor>(spec, std::move(runner));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.descriptor_name != b.descriptor_name || a.values.size() != b.values.size())
    throw DescriptorMismatchError("cannot compare " + a.descriptor_name + "[" +
                                  std::to_string(a.values.size()) + "] with " + b.descriptor_name + "[" +
                                  std::to_string(b.values.size()) + "]");
  return std::clamp(a.values.dot(b.values), -1.0, 1.0);
}

}  // namespace claimcheck
