#pragma once

#include <stdexcept>
#include <string>

namespace claimcheck {

/// Failure classes map onto the process exit codes of the command-line tool.
enum class ErrorClass { config = 2, data = 3, model = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), class_(cls), kind_(kind) {}

  ErrorClass error_class() const noexcept { return class_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorClass class_;
  std::string kind_;
};

#define CLAIMCHECK_DEFINE_ERROR(Name, Class)                                  \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& message)                                 \
        : Error(ErrorClass::Class, #Name, message) {}                         \
  };

CLAIMCHECK_DEFINE_ERROR(ConfigError, config)

CLAIMCHECK_DEFINE_ERROR(ParseError, data)
CLAIMCHECK_DEFINE_ERROR(ValidationError, data)
CLAIMCHECK_DEFINE_ERROR(DecodeError, data)
CLAIMCHECK_DEFINE_ERROR(TooSmallError, data)
CLAIMCHECK_DEFINE_ERROR(MissingLandmarksError, data)
CLAIMCHECK_DEFINE_ERROR(DegenerateLandmarksError, data)
CLAIMCHECK_DEFINE_ERROR(EmptyRegionError, data)
CLAIMCHECK_DEFINE_ERROR(ZeroVectorError, data)
CLAIMCHECK_DEFINE_ERROR(DescriptorMismatchError, data)
CLAIMCHECK_DEFINE_ERROR(TooFewSamplesError, data)
CLAIMCHECK_DEFINE_ERROR(LabelCountError, data)
CLAIMCHECK_DEFINE_ERROR(EmptySampleError, data)
CLAIMCHECK_DEFINE_ERROR(DegenerateVarianceError, data)
CLAIMCHECK_DEFINE_ERROR(UnavailableMetricError, data)
CLAIMCHECK_DEFINE_ERROR(IOError, data)

CLAIMCHECK_DEFINE_ERROR(ModelLoadError, model)
CLAIMCHECK_DEFINE_ERROR(ShapeMismatchError, model)
CLAIMCHECK_DEFINE_ERROR(InferenceError, model)
CLAIMCHECK_DEFINE_ERROR(ClassifierIOError, model)

#undef CLAIMCHECK_DEFINE_ERROR

inline int exit_code(ErrorClass cls) noexcept { return static_cast<int>(cls); }

}  // namespace claimcheck
