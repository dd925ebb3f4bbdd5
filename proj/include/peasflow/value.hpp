#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "peasflow/error.hpp"

namespace peasflow {

/// Scalar attribute value: integer, float or string.
class Value {
 public:
  Value() : v_(0.0) {}
  Value(double d) : v_(d) {}
  Value(std::int64_t i) : v_(i) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(const char* s) : v_(std::string(s)) {}

  bool is_number() const { return !std::holds_alternative<std::string>(v_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }

  double as_double() const {
    if (auto* d = std::get_if<double>(&v_)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*i);
    throw PeasError(ErrorCode::TypeMismatch, "string value used as number");
  }
  std::int64_t as_integer() const {
    if (auto* i = std::get_if<std::int64_t>(&v_)) return *i;
    throw PeasError(ErrorCode::TypeMismatch, "value is not an integer");
  }
  const std::string& as_string() const {
    if (auto* s = std::get_if<std::string>(&v_)) return *s;
    throw PeasError(ErrorCode::TypeMismatch, "numeric value used as string");
  }

  bool operator==(const Value&) const = default;

  /// Mixed numeric kinds compare by numeric value; string vs number throws.
  int compare(const Value& other) const {
    if (is_string() != other.is_string())
      throw PeasError(ErrorCode::TypeMismatch,
                      "cannot compare string with number");
    if (is_string()) return as_string().compare(other.as_string());
    double a = as_double(), b = other.as_double();
    return a < b ? -1 : (a > b ? 1 : 0);
  }

  std::string to_string() const;

 private:
  std::variant<std::int64_t, double, std::string> v_;
};

}  // namespace peasflow
