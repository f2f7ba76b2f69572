#pragma once

#include <stdexcept>
#include <string>

namespace bimdrift {

// Base of every error raised by the library. Subclasses name the failure
// so callers (the CLI in particular) can map them onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BIMDRIFT_DEFINE_ERROR(Name)                 \
  class Name : public Error {                       \
   public:                                          \
    explicit Name(const std::string& what)          \
        : Error(std::string(#Name ": ") + what) {}  \
  }

BIMDRIFT_DEFINE_ERROR(CollinearInput);
BIMDRIFT_DEFINE_ERROR(NonCoplanarInput);
BIMDRIFT_DEFINE_ERROR(ParseError);
BIMDRIFT_DEFINE_ERROR(ValidationError);
BIMDRIFT_DEFINE_ERROR(SingularCovariance);
BIMDRIFT_DEFINE_ERROR(EmptyMatchSet);
BIMDRIFT_DEFINE_ERROR(NonFiniteCost);
BIMDRIFT_DEFINE_ERROR(UnknownWallId);
BIMDRIFT_DEFINE_ERROR(OutOfOrderKeyframe);
BIMDRIFT_DEFINE_ERROR(WaypointOutsideScene);

#undef BIMDRIFT_DEFINE_ERROR

}  // namespace bimdrift
