#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace scoreforge {

// Base error carrying a stable machine-readable kind. The CLI prints
// "error: <kind>: <message>" on a single line and exits nonzero.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define SCOREFORGE_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                            \
  public:                                                                 \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

SCOREFORGE_DEFINE_ERROR(SchemaError);
SCOREFORGE_DEFINE_ERROR(DanglingReference);
SCOREFORGE_DEFINE_ERROR(DuplicateId);
SCOREFORGE_DEFINE_ERROR(UnknownScenario);
SCOREFORGE_DEFINE_ERROR(ConstraintViolation);
SCOREFORGE_DEFINE_ERROR(NonInjectiveAssignment);
SCOREFORGE_DEFINE_ERROR(NotDerivable);
SCOREFORGE_DEFINE_ERROR(VocabularyMismatch);
SCOREFORGE_DEFINE_ERROR(NoConsistentAssignment);
SCOREFORGE_DEFINE_ERROR(NotUnique);
SCOREFORGE_DEFINE_ERROR(UnsatisfiableScenario);
SCOREFORGE_DEFINE_ERROR(RetryBudgetExhausted);
SCOREFORGE_DEFINE_ERROR(DegenerateOptions);
SCOREFORGE_DEFINE_ERROR(MissingFeature);
SCOREFORGE_DEFINE_ERROR(SinkError);
SCOREFORGE_DEFINE_ERROR(MissingTemplate);
SCOREFORGE_DEFINE_ERROR(MissingHoleBinding);
SCOREFORGE_DEFINE_ERROR(UnknownQuestion);
SCOREFORGE_DEFINE_ERROR(EndpointError);
SCOREFORGE_DEFINE_ERROR(CassetteMiss);
SCOREFORGE_DEFINE_ERROR(UsageError);

#undef SCOREFORGE_DEFINE_ERROR

}  // namespace scoreforge
