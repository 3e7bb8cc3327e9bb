#ifndef GFLOW_ERRORS_HPP
#define GFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gflow {

/// Base class of every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GFLOW_DECLARE_ERROR(Name)        \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

GFLOW_DECLARE_ERROR(UnknownDomain);
GFLOW_DECLARE_ERROR(UnknownProblem);
GFLOW_DECLARE_ERROR(OutOfDomain);
GFLOW_DECLARE_ERROR(InvalidPotential);
GFLOW_DECLARE_ERROR(InvalidFunction);
GFLOW_DECLARE_ERROR(InvalidMap);
GFLOW_DECLARE_ERROR(SolverFailure);
GFLOW_DECLARE_ERROR(DegenerateIterate);
GFLOW_DECLARE_ERROR(DegenerateConstraint);
GFLOW_DECLARE_ERROR(EmptyLocalSpace);
GFLOW_DECLARE_ERROR(InternalError);
GFLOW_DECLARE_ERROR(CapExceeded);
GFLOW_DECLARE_ERROR(FormatError);
GFLOW_DECLARE_ERROR(IoError);

#undef GFLOW_DECLARE_ERROR

/// Raised by the backtracking step search when no trial step lowers the
/// energy; the iterate is then a discrete eigenfunction to working precision.
class Stagnation : public Error {
 public:
  using Error::Error;
};

}  // namespace gflow

#endif  // GFLOW_ERRORS_HPP
