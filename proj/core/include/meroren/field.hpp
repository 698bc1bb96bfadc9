#pragma once

// Coefficient fields for germ numerators: exact Gaussian rationals and
// approximate complex doubles. Algorithms are templated on the field and
// talk to it only through FieldTraits.

#include <boost/multiprecision/gmp.hpp>

#include <complex>
#include <compare>
#include <string>

namespace meroren {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;
using Complex = std::complex<double>;

/// a + b i with a, b rational.
struct GaussRational {
  Rational re{0};
  Rational im{0};

  GaussRational() = default;
  GaussRational(Rational r) : re(std::move(r)) {}  // NOLINT: implicit from rational is intended
  GaussRational(long long r) : re(r) {}            // NOLINT
  GaussRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  bool is_zero() const { return re == 0 && im == 0; }
  GaussRational conj() const { return {re, -im}; }

  GaussRational& operator+=(const GaussRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  GaussRational& operator-=(const GaussRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  GaussRational& operator*=(const GaussRational& o) {
    Rational r = re * o.re - im * o.im;
    Rational i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
  }
  GaussRational& operator/=(const GaussRational& o);

  friend GaussRational operator+(GaussRational a, const GaussRational& b) { return a += b; }
  friend GaussRational operator-(GaussRational a, const GaussRational& b) { return a -= b; }
  friend GaussRational operator*(GaussRational a, const GaussRational& b) { return a *= b; }
  friend GaussRational operator/(GaussRational a, const GaussRational& b) { return a /= b; }
  friend GaussRational operator-(const GaussRational& a) { return {-a.re, -a.im}; }
  friend bool operator==(const GaussRational& a, const GaussRational& b) {
    return a.re == b.re && a.im == b.im;
  }

  Complex to_complex() const {
    return {static_cast<double>(re), static_cast<double>(im)};
  }
};

std::string to_string(const Rational& r);
std::string to_string(const GaussRational& z);
std::string to_string(const Complex& z);

template <class C>
struct FieldTraits;

template <>
struct FieldTraits<GaussRational> {
  static constexpr bool exact = true;
  static GaussRational from_rational(const Rational& r) { return GaussRational(r); }
  static bool is_zero(const GaussRational& z) { return z.is_zero(); }
  static Complex to_complex(const GaussRational& z) { return z.to_complex(); }
  static double magnitude(const GaussRational& z) { return std::abs(z.to_complex()); }
};

template <>
struct FieldTraits<Complex> {
  static constexpr bool exact = false;
  static Complex from_rational(const Rational& r) { return {static_cast<double>(r), 0.0}; }
  static bool is_zero(const Complex& z) { return z == Complex{}; }
  static Complex to_complex(const Complex& z) { return z; }
  static double magnitude(const Complex& z) { return std::abs(z); }
};

template <class C>
concept CoefficientField = requires { FieldTraits<C>::exact; };

}  // namespace meroren
