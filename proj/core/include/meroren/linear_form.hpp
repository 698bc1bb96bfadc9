#pragma once

#include "meroren/field.hpp"

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace meroren {

/// Integer linear form L(x) = sum_j a_j x_j over p variables.
///
/// Canonical forms have gcd(a) = 1 and a positive first nonzero
/// coefficient; pole multisets are keyed on canonical forms only.
class LinearForm {
 public:
  LinearForm() = default;
  explicit LinearForm(std::vector<long long> coeffs);

  /// Unit form x_index over p variables.
  static LinearForm coordinate(std::size_t p, std::size_t index);

  std::size_t size() const { return coeffs_.size(); }
  long long operator[](std::size_t i) const { return coeffs_[i]; }
  const std::vector<long long>& coeffs() const { return coeffs_; }

  bool is_zero() const;
  bool is_canonical() const;

  /// Splits this form as scale * canonical.
  std::pair<LinearForm, long long> canonicalize() const;

  /// Pads with zero coefficients up to p variables.
  LinearForm embedded(std::size_t p) const;

  /// Indices with nonzero coefficient.
  std::vector<std::size_t> support() const;

  template <class T>
  T apply(std::span<const T> x) const {
    T acc{};
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (coeffs_[i] != 0) acc += T(coeffs_[i]) * x[i];
    return acc;
  }

  Rational dot(const LinearForm& other) const;

  std::string to_string() const;

  friend auto operator<=>(const LinearForm&, const LinearForm&) = default;
  friend bool operator==(const LinearForm&, const LinearForm&) = default;

 private:
  std::vector<long long> coeffs_;
};

// Small dense exact linear algebra used by the projection and the
// reduction of dependent pole sets.
using RationalMatrix = std::vector<std::vector<Rational>>;

std::size_t rank(RationalMatrix rows);

/// Inverse of a square matrix, nullopt when singular.
std::optional<RationalMatrix> inverse(const RationalMatrix& m);

/// Coefficients c with sum_i c_i rows[i] = target, nullopt if target is
/// outside the span. rows must be independent.
std::optional<std::vector<Rational>> solve_in_span(const RationalMatrix& rows,
                                                   const std::vector<Rational>& target);

RationalMatrix to_matrix(std::span<const LinearForm> forms);
std::vector<Rational> to_rational(const LinearForm& form);

/// Scales a rational vector to the primitive integer vector with positive
/// leading entry.
LinearForm primitive_form(const std::vector<Rational>& v);

bool linearly_independent(std::span<const LinearForm> forms);

/// Basis of the complement of span(forms) orthogonal for the standard inner
/// product, obtained by Gram-Schmidt over e_1..e_p in index order and
/// rescaled to primitive integer forms. Throws GermError("dependent input")
/// if the forms are dependent.
std::vector<LinearForm> orth_complement(std::span<const LinearForm> forms, std::size_t p);

}  // namespace meroren
