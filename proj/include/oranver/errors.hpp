#pragma once

#include <stdexcept>
#include <string>

namespace oranver {

// Base of every error the library raises. Callers that only care about
// "something in the simulation setup was wrong" can catch this.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define ORANVER_DEFINE_ERROR(Name)                                             \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

ORANVER_DEFINE_ERROR(NoNewerVersion);
ORANVER_DEFINE_ERROR(UnknownVersion);
ORANVER_DEFINE_ERROR(UnknownModel);
ORANVER_DEFINE_ERROR(NonMonotonicRelease);
ORANVER_DEFINE_ERROR(NoCapacity);
ORANVER_DEFINE_ERROR(InvalidScenario);
ORANVER_DEFINE_ERROR(HorizonZero);
ORANVER_DEFINE_ERROR(EmptyTrace);
ORANVER_DEFINE_ERROR(EmptyGroup);
ORANVER_DEFINE_ERROR(TooFewReplications);
ORANVER_DEFINE_ERROR(OutputExists);
ORANVER_DEFINE_ERROR(ParseError);

#undef ORANVER_DEFINE_ERROR

} // namespace oranver
