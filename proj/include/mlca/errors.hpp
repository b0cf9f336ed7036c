#pragma once

#include <stdexcept>
#include <string>

namespace mlca {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bundle/allocation lengths disagree with the instance's item count.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A nonempty bundle was looked up in a report set that never reported it.
class UndefinedReportError : public Error {
 public:
  using Error::Error;
};

/// The instance is too large for the requested exact method.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class NumericOverflowError : public Error {
 public:
  using Error::Error;
};

/// A solver was handed a learned model it has no encoding for.
class ModelKindError : public Error {
 public:
  using Error::Error;
};

/// A bidder has reported (or been sent) every bundle there is.
class ExhaustedBidderError : public Error {
 public:
  using Error::Error;
};

class DomainTooSmallError : public Error {
 public:
  using Error::Error;
};

/// Efficiency is undefined because the optimal welfare is zero.
class DegenerateInstanceError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlca
