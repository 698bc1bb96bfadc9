#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace meroren {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Algebraic failures in germ manipulation ("dependent input", ...).
class GermError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Evaluation requested on (or within the guard of) a pole hyperplane.
class PoleError : public Error {
 public:
  PoleError() : Error("on pole hyperplane") {}
  explicit PoleError(const std::string& what) : Error(what) {}
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Laurent extraction failures: non-convergence or Cauchy-decay violation.
class ExtractionError : public Error {
 public:
  using Error::Error;
};

class CatalogError : public Error {
 public:
  using Error::Error;
};

class ValidityError : public Error {
 public:
  using Error::Error;
};

}  // namespace meroren
