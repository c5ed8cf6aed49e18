#pragma once

#include <stdexcept>
#include <string>

namespace coarse {

// A mathematical precondition of an operation does not hold (disconnected
// block, non-prime modulus, size bound exceeded, ...).
class Rejection : public std::domain_error {
 public:
  explicit Rejection(const std::string& what) : std::domain_error(what) {}
};

// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed document (JSON schema mismatch, bad descriptor syntax).
class FormatError : public std::invalid_argument {
 public:
  explicit FormatError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace coarse
