#pragma once

#include <stdexcept>
#include <string>

namespace geofuse {

/// Base class for everything thrown by this library.
class error : public std::runtime_error {
public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A scalar argument is outside its allowed range (sigma <= 0, fraction > 1, ...).
class parameter_error : public error {
public:
  using error::error;
};

/// An operation was applied to a grid of the wrong kind (blur on categorical, ...).
class kind_error : public error {
public:
  using error::error;
};

/// Text input could not be parsed; the message names the line or feature index.
class parse_error : public error {
public:
  using error::error;
};

/// Binary or canonical-text container is malformed or unrepresentable.
class format_error : public error {
public:
  using error::error;
};

/// Matrix/vector/grid dimensions do not agree.
class shape_error : public error {
public:
  using error::error;
};

/// Grids that must share shape and transform do not; names the offenders.
class alignment_error : public error {
public:
  using error::error;
};

/// A class id has no entry in the palette / class map.
class mapping_error : public error {
public:
  using error::error;
};

/// Input values violate a data contract (out-of-range class id, NaN, no valid pixels).
class data_error : public error {
public:
  using error::error;
};

/// Degenerate numerical situation: constant range, zero-norm vector, zero variance.
class degenerate_error : public error {
public:
  using error::error;
};

/// Filesystem-level failure (missing file, failed write). CLI maps this to exit 2.
class io_error : public error {
public:
  using error::error;
};

}  // namespace geofuse
