#include "sparse_pr/format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <string>

#include "sparse_pr/error.hpp"

namespace spr {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) {
    throw Error(ErrorCode::io, "format_double: conversion failed");
  }
  return std::string(buf.data(), ptr);
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string{};
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw InvalidParameter("cannot parse '" + std::string(text) + "' as a number");
  }
  return value;
}

}  // namespace spr
