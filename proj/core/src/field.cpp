#include "meroren/field.hpp"

#include "meroren/errors.hpp"
#include "meroren/polynomial.hpp"

#include <cstdio>
#include <sstream>

namespace meroren {

GaussRational& GaussRational::operator/=(const GaussRational& o) {
  Rational den = o.re * o.re + o.im * o.im;
  if (den == 0) throw GermError("division by zero");
  Rational r = (re * o.re + im * o.im) / den;
  Rational i = (im * o.re - re * o.im) / den;
  re = std::move(r);
  im = std::move(i);
  return *this;
}

std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

std::string to_string(const GaussRational& z) {
  if (z.im == 0) return to_string(z.re);
  if (z.re == 0) return to_string(z.im) + "*i";
  std::string im = to_string(z.im);
  return to_string(z.re) + (z.im > 0 ? "+" : "") + im + "*i";
}

std::string to_string(const Complex& z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g%+.17g*i", z.real(), z.imag());
  return buf;
}

std::string coefficient_text(const GaussRational& c) { return "(" + to_string(c) + ")"; }
std::string coefficient_text(const Complex& c) { return "(" + to_string(c) + ")"; }

}  // namespace meroren
