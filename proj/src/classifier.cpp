#include "claimcheck/classifier.hpp"

#include "claimcheck/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace claimcheck {

AuxClassifier::AuxClassifier(std::string name, std::unique_ptr<ModelRunner> runner,
                             TensorInputSpec input, std::vector<std::string> classes)
    : name_(std::move(name)), runner_(std::move(runner)), input_(input), classes_(std::move(classes)) {
  if (!runner_) throw ModelLoadError("classifier '" + name_ + "' has no model");
  if (classes_.size() < 2) throw ConfigError("classifier '" + name_ + "' needs at least two classes");
}

std::unique_ptr<AuxClassifier> AuxClassifier::load(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open classifier config " + config_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(config_path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("model_path") || !doc["model_path"].is_string() || !doc.contains("classes") ||
      !doc["classes"].is_array())
    throw ConfigError(config_path.string() + ": classifier config needs model_path and a classes array");
  for (const auto& [key, value] : doc.items())
    if (key != "name" && key != "model_path" && key != "input" && key != "classes" && key != "smoke_test" &&
        key != "source" && key != "notes")
      throw ConfigError(config_path.string() + ": unknown key '" + key + "'");
  std::vector<std::string> classes;
  for (const auto& c : doc["classes"]) {
    if (!c.is_string()) throw ConfigError(config_path.string() + ": class names must be strings");
    classes.push_back(c.get<std::string>());
  }
  const std::string name = doc.value("name", config_path.stem().string());
  const TensorInputSpec input = parse_input_spec(doc.value("input", nlohmann::json{}));
  const auto smoke = parse_smoke_test(doc.value("smoke_test", nlohmann::json{}));
  auto runner = load_onnx_model(resolve_model_path(doc["model_path"].get<std::string>(), config_path.parent_path()));
  if (smoke) {
    const Eigen::VectorXf probe = Eigen::VectorXf::Constant(
        static_cast<Eigen::Index>(input.channels()) * input.height * input.width, static_cast<float>(smoke->input_fill));
    check_smoke_test(*smoke, runner->forward(probe, input), name);
  }
  return std::make_unique<AuxClassifier>(name, std::move(runner), input, std::move(classes));
}

Eigen::VectorXd AuxClassifier::probabilities(const AlignedFace& face) const {
  const Eigen::VectorXf tensor = make_input_tensor(face, input_);
  Eigen::VectorXf out;
  {
    std::lock_guard lock(mutex_);
    try {
      out = runner_->forward(tensor, input_);
    } catch (const Error& e) {
      throw ClassifierIOError(name_ + ": " + e.what());
    }
  }
  if (out.size() != static_cast<Eigen::Index>(classes_.size()))
    throw ClassifierIOError(name_ + ": expected " + std::to_string(classes_.size()) +
                            " probabilities, model produced " + std::to_string(out.size()));
  const Eigen::VectorXd p = out.cast<double>();
  if (!p.allFinite() || (p.array() < 0.0).any())
    throw ClassifierIOError(name_ + ": output is not a probability vector");
  if (std::abs(p.sum() - 1.0) > kProbabilitySumTolerance)
    throw ClassifierIOError(name_ + ": probabilities sum to " + std::to_string(p.sum()));
  return p;
}

double AuxClassifier::probability_of(std::string_view class_name, const AlignedFace& face) const {
  const auto it = std::find(classes_.begin(), classes_.end(), class_name);
  if (it == classes_.end())
    throw ClassifierIOError(name_ + ": no class named '" + std::string(class_name) + "'");
  return std::clamp(probabilities(face)(it - classes_.begin()), 0.0, 1.0);
}

}  // namespace claimcheck
