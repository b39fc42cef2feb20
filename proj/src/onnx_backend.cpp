#include "claimcheck/errors.hpp"
#include "claimcheck/model.hpp"

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

#include <cstdlib>

namespace claimcheck {

namespace {

class OnnxRunner final : public ModelRunner {
 public:
  explicit OnnxRunner(cv::dnn::Net net) : net_(std::move(net)) {}

  Eigen::VectorXf forward(const Eigen::VectorXf& input, const TensorInputSpec& spec) override {
    const int dims[4] = {1, spec.channels(), spec.height, spec.width};
    if (input.size() != static_cast<Eigen::Index>(spec.channels()) * spec.height * spec.width)
      throw InferenceError("input tensor size does not match its declared layout");
    // cv::Mat wraps the buffer; setInput copies it.
    cv::Mat blob(4, dims, CV_32F, const_cast<float*>(input.data()));
    cv::Mat out;
    try {
      net_.setInput(blob);
      out = net_.forward();
    } catch (const cv::Exception& e) {
      throw InferenceError(e.what());
    }
    if (out.depth() != CV_32F || !out.isContinuous())
      throw InferenceError("model output is not a contiguous float tensor");
    return Eigen::Map<const Eigen::VectorXf>(out.ptr<float>(), static_cast<Eigen::Index>(out.total()));
  }

 private:
  cv::dnn::Net net_;
};

}  // namespace

std::unique_ptr<ModelRunner> load_onnx_model(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path))
    throw ModelLoadError("model file not found: " + path.string());
  try {
    cv::dnn::Net net = cv::dnn::readNetFromONNX(path.string());
    if (net.empty()) throw ModelLoadError("empty network in " + path.string());
    net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
    net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
    return std::make_unique<OnnxRunner>(std::move(net));
  } catch (const cv::Exception& e) {
    throw ModelLoadError(path.string() + ": " + e.what());
  }
}

std::filesystem::path resolve_model_path(const std::filesystem::path& model_path,
                                         const std::filesystem::path& config_dir) {
  if (model_path.is_absolute()) return model_path;
  const std::filesystem::path local = config_dir / model_path;
  if (std::filesystem::exists(local)) return local;
  if (const char* env = std::getenv("CLAIMCHECK_MODEL_DIR"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env) / model_path;
  }
  return local;
}

}  // namespace claimcheck
