#pragma once

#include "meroren/germ.hpp"

#include <string_view>

namespace meroren {

/// Parses a germ expression in the shifted variables l1..lp.
///
///   expr    = term { ("+" | "-") term } ;
///   term    = unary { ("*" | "/") unary } ;
///   unary   = ("+" | "-") unary | power ;
///   power   = atom [ "^" ["-"] integer ] ;
///   atom    = number | "i" | "l" integer | "(" expr ")" ;
///   number  = digits [ "." digits ] ;
///
/// Denominators must factor into powers of linear forms through the origin;
/// factors are found among the linear subexpressions of the input.
ExactGerm parse_germ(std::string_view text, std::size_t p);

/// Canonical text; parse_germ(to_text(g), p) reproduces g.
std::string to_text(const ExactGerm& g);

}  // namespace meroren
