#pragma once

#include <stdexcept>
#include <string>

namespace sandpile {

// Every failure raised by the library carries a stable, machine-readable kind
// next to the human message; the CLI prints both.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

#define SANDPILE_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                          \
   public:                                                             \
    using Error::Error;                                                \
    const char* kind() const noexcept override { return #Name; }       \
  }

SANDPILE_DEFINE_ERROR(InvalidArgument);
SANDPILE_DEFINE_ERROR(ParseError);
SANDPILE_DEFINE_ERROR(NonConvergent);
SANDPILE_DEFINE_ERROR(BudgetExhausted);
SANDPILE_DEFINE_ERROR(InvariantViolation);
SANDPILE_DEFINE_ERROR(EmptyNeighborhood);
SANDPILE_DEFINE_ERROR(FlatShape);
SANDPILE_DEFINE_ERROR(ZeroVector);
SANDPILE_DEFINE_ERROR(NotACrossing);
SANDPILE_DEFINE_ERROR(PlanFailure);
SANDPILE_DEFINE_ERROR(RatioTooSmall);
SANDPILE_DEFINE_ERROR(GeometryConflict);
SANDPILE_DEFINE_ERROR(SynthesisBug);
SANDPILE_DEFINE_ERROR(NoRatioFound);

#undef SANDPILE_DEFINE_ERROR

}  // namespace sandpile
