#pragma once

#include <stdexcept>
#include <string>

namespace trajbench {

// Broad failure classes. The CLI maps each one to a stable exit code.
enum class ErrorCategory {
  kConfiguration = 1,
  kData = 2,
  kExecution = 3,
  kEvaluation = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Module errors carry a module-specific kind enum next to the category.
template <typename Kind, ErrorCategory kCategory>
class KindedError : public Error {
 public:
  KindedError(Kind kind, const std::string& message)
      : Error(kCategory, message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace trajbench
