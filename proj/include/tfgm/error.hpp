//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>

namespace tfgm {

/// Base exception for all precondition, shape and I/O failures in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input files. The message carries the file path
/// and the offending position (byte offset or JSON path).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace tfgm
