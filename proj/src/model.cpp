#include "claimcheck/model.hpp"

#include "claimcheck/errors.hpp"

#include <algorithm>
#include <cmath>

namespace claimcheck {

namespace {

ChannelOrder parse_order(const std::string& s) {
  if (s == "rgb" || s == "RGB") return ChannelOrder::rgb;
  if (s == "bgr" || s == "BGR") return ChannelOrder::bgr;
  if (s == "gray" || s == "GRAY") return ChannelOrder::gray;
  throw ConfigError("unknown channel_order '" + s + "' (expected rgb, bgr or gray)");
}

std::array<double, 3> parse_triple(const nlohmann::json& j, const char* field) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return {v, v, v};
  }
  if (!j.is_array() || j.empty() || j.size() > 3)
    throw ConfigError(std::string(field) + " must be a number or an array of 1-3 numbers");
  std::array<double, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) out[c] = j[std::min(c, j.size() - 1)].get<double>();
  return out;
}

}  // namespace

TensorInputSpec parse_input_spec(const nlohmann::json& j) {
  TensorInputSpec spec;
  if (j.is_null()) return spec;
  if (!j.is_object()) throw ConfigError("input spec must be an object");
  for (const auto& [key, value] : j.items())
    if (key != "width" && key != "height" && key != "channel_order" && key != "mean" && key != "scale" &&
        key != "layout")
      throw ConfigError("unknown input spec key '" + key + "'");
  if (j.value("layout", std::string("NCHW")) != "NCHW") throw ConfigError("only NCHW input layout is supported");
  spec.width = j.value("width", spec.width);
  spec.height = j.value("height", spec.height);
  if (spec.width <= 0 || spec.height <= 0) throw ConfigError("input width/height must be positive");
  if (auto it = j.find("channel_order"); it != j.end()) spec.order = parse_order(it->get<std::string>());
  if (auto it = j.find("mean"); it != j.end()) spec.mean = parse_triple(*it, "mean");
  if (auto it = j.find("scale"); it != j.end()) spec.scale = parse_triple(*it, "scale");
  return spec;
}

nlohmann::json to_json(const TensorInputSpec& spec) {
  const char* order = spec.order == ChannelOrder::rgb ? "rgb" : spec.order == ChannelOrder::bgr ? "bgr" : "gray";
  return {{"width", spec.width}, {"height", spec.height}, {"channel_order", order},
          {"mean", spec.mean}, {"scale", spec.scale}, {"layout", "NCHW"}};
}

std::optional<SmokeTest> parse_smoke_test(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_object() || !j.contains("input_fill") || !j["input_fill"].is_number() ||
      !j.contains("expected_output") || !j["expected_output"].is_array() || j["expected_output"].empty())
    throw ConfigError("smoke_test needs a numeric input_fill and a non-empty expected_output array");
  SmokeTest t;
  t.input_fill = j["input_fill"].get<double>();
  for (const auto& v : j["expected_output"]) {
    if (!v.is_number()) throw ConfigError("smoke_test expected_output must be numeric");
    t.expected_output.push_back(v.get<double>());
  }
  t.tolerance = j.value("tolerance", t.tolerance);
  if (!(t.tolerance > 0.0)) throw ConfigError("smoke_test tolerance must be positive");
  return t;
}

nlohmann::json to_json(const SmokeTest& t) {
  return {{"input_fill", t.input_fill}, {"expected_output", t.expected_output}, {"tolerance", t.tolerance}};
}

void check_smoke_test(const SmokeTest& test, const Eigen::VectorXf& output, const std::string& name) {
  if (static_cast<std::size_t>(output.size()) < test.expected_output.size())
    throw ModelLoadError(name + ": smoke test expects " + std::to_string(test.expected_output.size()) +
                         " values, model produced " + std::to_string(output.size()));
  double worst = 0.0;
  for (std::size_t k = 0; k < test.expected_output.size(); ++k)
    worst = std::max(worst, std::abs(static_cast<double>(output(static_cast<Eigen::Index>(k))) -
                                     test.expected_output[k]));
  if (!(worst <= test.tolerance))
    throw ModelLoadError(name + ": smoke test deviates by " + std::to_string(worst) + " (tolerance " +
                         std::to_string(test.tolerance) + ")");
}

Eigen::VectorXf make_input_tensor(const AlignedFace& face, const TensorInputSpec& spec) {
  const RgbImage& src = (face.pixels.rows() == spec.height && face.pixels.cols() == spec.width)
                            ? face.pixels
                            : resize_bilinear(face.pixels, spec.height, spec.width);
  const Eigen::Index plane = static_cast<Eigen::Index>(spec.height) * spec.width;
  Eigen::VectorXf tensor(plane * spec.channels());
  if (spec.order == ChannelOrder::gray) {
    const LumaPlane y = luma(src);
    for (Eigen::Index k = 0; k < plane; ++k)
      tensor(k) = static_cast<float>((y.data()[k] * 255.0 - spec.mean[0]) * spec.scale[0]);
    return tensor;
  }
  for (int c = 0; c < 3; ++c) {
    const int source_channel = spec.order == ChannelOrder::rgb ? c : 2 - c;
    const std::uint8_t* px = src.channels[source_channel].data();
    for (Eigen::Index k = 0; k < plane; ++k)
      tensor(c * plane + k) = static_cast<float>((px[k] - spec.mean[c]) * spec.scale[c]);
  }
  return tensor;
}

}  // namespace claimcheck
