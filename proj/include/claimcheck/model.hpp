#pragma once

#include "claimcheck/ingest.hpp"

#include <Eigen/Dense>

#include "json.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace claimcheck {

enum class ChannelOrder { rgb, bgr, gray };

/// How an aligned crop becomes a 1 x C x H x W float tensor:
/// value = (pixel - mean[c]) * scale[c], pixels in 0..255.
struct TensorInputSpec {
  int width = kAlignedSize;
  int height = kAlignedSize;
  ChannelOrder order = ChannelOrder::rgb;
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> scale{1.0 / 255.0, 1.0 / 255.0, 1.0 / 255.0};

  int channels() const { return order == ChannelOrder::gray ? 1 : 3; }
};

/// Reads {width, height, channel_order, mean, scale}; absent fields keep defaults.
TensorInputSpec parse_input_spec(const nlohmann::json& j);
nlohmann::json to_json(const TensorInputSpec& spec);

/// Flattened NCHW tensor for a face.
Eigen::VectorXf make_input_tensor(const AlignedFace& face, const TensorInputSpec& spec);

/// A single-input single-output network. Implementations are not required
/// to be thread-safe; owners serialize calls.
/// Recorded reference inference: the output for a tensor filled with
/// `input_fill` (already normalized). Export tooling writes it; loading
/// re-runs it.
struct SmokeTest {
  double input_fill = 0.0;
  std::vector<double> expected_output;  // leading output values
  double tolerance = 1e-4;
};

std::optional<SmokeTest> parse_smoke_test(const nlohmann::json& j);
nlohmann::json to_json(const SmokeTest& t);

/// Throws ModelLoadError with the maximum deviation when `output` disagrees.
void check_smoke_test(const SmokeTest& test, const Eigen::VectorXf& output, const std::string& name);

class ModelRunner {
 public:
  virtual ~ModelRunner() = default;
  virtual Eigen::VectorXf forward(const Eigen::VectorXf& input, const TensorInputSpec& spec) = 0;
};

/// Loads an ONNX file. Throws ModelLoadError naming the path on failure.
std::unique_ptr<ModelRunner> load_onnx_model(const std::filesystem::path& path);

/// Resolves a model path: absolute paths pass through, relative ones are
/// tried against `config_dir`, then the CLAIMCHECK_MODEL_DIR directory.
std::filesystem::path resolve_model_path(const std::filesystem::path& model_path,
                                         const std::filesystem::path& config_dir);

}  // namespace claimcheck
