#pragma once

#include <stdexcept>
#include <string>

namespace fockcat
{
//! Base class for all library errors.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Input violates a precondition or a config schema.
class ValidationError : public Error
{
  public:
    using Error::Error;
};

//! The truncated number basis is too small for the requested state or
//! operator (tail mass or column norm check failed).
class TruncationError : public Error
{
  public:
    using Error::Error;
};

//! A numerical routine failed: optimizer stall, non-Hermitian input,
//! zero-probability branch, dimension overflow.
class NumericError : public Error
{
  public:
    using Error::Error;
};

//! File could not be read or written, or its content is malformed.
class IoError : public Error
{
  public:
    using Error::Error;
};

}  // namespace fockcat
