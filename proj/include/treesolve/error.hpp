#ifndef TREESOLVE_ERROR_HPP
#define TREESOLVE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ts {

/// Machine-readable failure categories. Every exception thrown by the
/// library carries one of these so that the C API and the CLI can map
/// failures to stable status / exit codes.
enum class ErrorCode {
  invalid_argument,
  invalid_shape,
  out_of_range,
  dimension_mismatch,
  singular_matrix,
  no_such_link,
  deadlock,
  input_count_mismatch,
  boundary_violation,
  invalid_dimension,
  insufficient_samples,
  schema_mismatch,
  shape_mismatch,
  io_error,
  format_error,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

#define TS_DEFINE_ERROR(Name, member)                          \
  class Name : public Error {                                  \
  public:                                                      \
    explicit Name(const std::string& what)                     \
        : Error(ErrorCode::member, what) {}                    \
  }

TS_DEFINE_ERROR(InvalidArgument, invalid_argument);
TS_DEFINE_ERROR(InvalidShape, invalid_shape);
TS_DEFINE_ERROR(OutOfRange, out_of_range);
TS_DEFINE_ERROR(DimensionMismatch, dimension_mismatch);
TS_DEFINE_ERROR(SingularMatrix, singular_matrix);
TS_DEFINE_ERROR(NoSuchLink, no_such_link);
TS_DEFINE_ERROR(DeadlockError, deadlock);
TS_DEFINE_ERROR(InputCountMismatch, input_count_mismatch);
TS_DEFINE_ERROR(BoundaryViolation, boundary_violation);
TS_DEFINE_ERROR(InvalidDimension, invalid_dimension);
TS_DEFINE_ERROR(InsufficientSamples, insufficient_samples);
TS_DEFINE_ERROR(SchemaMismatch, schema_mismatch);
TS_DEFINE_ERROR(ShapeMismatch, shape_mismatch);
TS_DEFINE_ERROR(IOError, io_error);
TS_DEFINE_ERROR(FormatError, format_error);

#undef TS_DEFINE_ERROR

}  // namespace ts

#endif  // TREESOLVE_ERROR_HPP
