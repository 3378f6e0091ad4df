#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace unimax {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define UNIMAX_DEFINE_ERROR(Name)         \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// Vector below the normalization threshold (degenerate combination).
UNIMAX_DEFINE_ERROR(ZeroVector);
// Every coefficient of a requested combination is zero.
UNIMAX_DEFINE_ERROR(ZeroCombination);
UNIMAX_DEFINE_ERROR(InvalidCount);
UNIMAX_DEFINE_ERROR(InvalidDimension);
UNIMAX_DEFINE_ERROR(InvalidTruncation);
UNIMAX_DEFINE_ERROR(ResolutionTooSmall);
UNIMAX_DEFINE_ERROR(ResolutionTooCoarse);
UNIMAX_DEFINE_ERROR(DimensionMismatch);
UNIMAX_DEFINE_ERROR(LinearlyDependent);
UNIMAX_DEFINE_ERROR(NotUnitLength);
UNIMAX_DEFINE_ERROR(MalformedInput);
UNIMAX_DEFINE_ERROR(UnsupportedPlot);

#undef UNIMAX_DEFINE_ERROR

struct FieldDiagnostic {
  std::string field;
  std::string message;
};

// Configuration rejected; carries one diagnostic per offending field.
class ConfigInvalid : public Error {
 public:
  explicit ConfigInvalid(std::vector<FieldDiagnostic> diagnostics)
      : Error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}
  ConfigInvalid(std::string field, std::string message)
      : ConfigInvalid(std::vector<FieldDiagnostic>{{std::move(field), std::move(message)}}) {}

  const std::vector<FieldDiagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string summarize(const std::vector<FieldDiagnostic>& diagnostics) {
    std::string out = "invalid configuration";
    for (const auto& d : diagnostics) {
      out += "\n  ";
      out += d.field;
      out += ": ";
      out += d.message;
    }
    return out;
  }

  std::vector<FieldDiagnostic> diagnostics_;
};

}  // namespace unimax
