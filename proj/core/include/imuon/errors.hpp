#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace imuon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gradient too small for its LMO to be defined.
class DegenerateGradient : public Error { public: using Error::Error; };
class SchemeDiverged : public Error { public: using Error::Error; };
class ShapeMismatch : public Error { public: using Error::Error; };
class InvalidInexactness : public Error { public: using Error::Error; };
class NonFiniteValue : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };
class MissingBlockPolicy : public Error { public: using Error::Error; };
class MissingCertificate : public Error { public: using Error::Error; };
class InsufficientGrid : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace imuon
