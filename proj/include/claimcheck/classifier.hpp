#pragma once

#include "claimcheck/model.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace claimcheck {

/// Optional auxiliary network (sunglasses detector, gender estimator) whose
/// output is a probability vector over named classes.
///
/// Calls are serialized per handle; share one handle across workers freely.
class AuxClassifier {
 public:
  static constexpr double kProbabilitySumTolerance = 1e-5;

  AuxClassifier(std::string name, std::unique_ptr<ModelRunner> runner, TensorInputSpec input,
                std::vector<std::string> classes);

  /// Reads a classifier configuration file:
  /// {"name", "model_path", "input": {...}, "classes": [...]}.
  static std::unique_ptr<AuxClassifier> load(const std::filesystem::path& config_path);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const TensorInputSpec& input_spec() const { return input_; }

  /// Runs the model and validates the output against the class list:
  /// right length, non-negative entries, sum 1 within tolerance.
  Eigen::VectorXd probabilities(const AlignedFace& face) const;

  /// Probability of the named class. Throws ClassifierIOError when the class
  /// is not declared.
  double probability_of(std::string_view class_name, const AlignedFace& face) const;

 private:
  std::string name_;
  std::unique_ptr<ModelRunner> runner_;
  TensorInputSpec input_;
  std::vector<std::string> classes_;
  mutable std::mutex mutex_;
};

}  // namespace claimcheck
