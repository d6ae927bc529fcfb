#ifndef KBC_BASE_ERRORS_H_
#define KBC_BASE_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kbc {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (bad XML, bad CSV cell, bad JSON line...).
class ParseError : public Error {
 public:
  ParseError(const std::string &what, size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  size_t byte_offset() const { return byte_offset_; }

 private:
  size_t byte_offset_;
};

class EmptyDocument : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration or violated precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerically undefined quantity, e.g. the cosine of a zero vector.
class Undefined : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class Divergence : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kbc

#endif  // KBC_BASE_ERRORS_H_
