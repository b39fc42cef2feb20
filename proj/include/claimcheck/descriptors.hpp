#pragma once

#include "claimcheck/ingest.hpp"
#include "claimcheck/model.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace claimcheck {

enum class DescriptorKind { neural_model, baseline };

struct DescriptorSpec {
  std::string name;
  DescriptorKind kind = DescriptorKind::baseline;
  std::optional<std::filesystem::path> model_path;
  int embedding_dim = 256;
  TensorInputSpec input;
  std::optional<SmokeTest> smoke_test;
};

/// The model-free descriptor: 16x16 block-averaged luma, mean removed.
DescriptorSpec baseline_spec();

/// Parses a descriptor preset file. Relative model paths resolve against the
/// preset's directory and then CLAIMCHECK_MODEL_DIR.
DescriptorSpec load_descriptor_spec(const std::filesystem::path& preset_path);

/// Finds a preset by name (`baseline` is built in) or by file path.
DescriptorSpec find_descriptor_spec(const std::string& name_or_path,
                                    const std::filesystem::path& preset_dir);

/// Preset directory: CLAIMCHECK_PRESET_DIR when set, else the source tree's
/// config/descriptors.
std::filesystem::path default_preset_dir();

struct EmbeddingVector {
  std::string descriptor_name;
  Eigen::VectorXd values;  // unit L2 norm
  std::string source_id;
};

/// Loaded descriptor backend. Neural inference is serialized per handle.
class Descriptor {
 public:
  explicit Descriptor(DescriptorSpec spec, std::unique_ptr<ModelRunner> runner = nullptr);

  const DescriptorSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  int embedding_dim() const { return spec_.embedding_dim; }

  EmbeddingVector embed(const AlignedFace& face) const;

 private:
  Eigen::VectorXd raw_features(const AlignedFace& face) const;

  DescriptorSpec spec_;
  std::unique_ptr<ModelRunner> runner_;
  mutable std::mutex mutex_;
};

/// Loads the backend and, for neural models, checks the output length with a
/// probe inference. Throws ModelLoadError or ShapeMismatchError.
std::unique_ptr<Descriptor> load_descriptor(const DescriptorSpec& spec);

/// Baseline features before normalization (mean-removed block averages).
Eigen::VectorXd baseline_features(const LumaPlane& luma, int grid);

/// Dot product of two unit embeddings, clamped to [-1, 1].
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace claimcheck
