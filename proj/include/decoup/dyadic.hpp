#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace decoup {

using BigInt = boost::multiprecision::cpp_int;

/// Exact nonnegative number mantissa * 2^exponent.
///
/// Always held in canonical form: the mantissa is odd, or the value is zero
/// and the exponent is 0. Equality is therefore structural.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(BigInt mantissa, std::int64_t exponent);

  static Dyadic from_int(std::uint64_t v) { return Dyadic(BigInt(v), 0); }
  /// 2^e.
  static Dyadic pow2(std::int64_t e) { return Dyadic(BigInt(1), e); }

  const BigInt& mantissa() const noexcept { return mantissa_; }
  std::int64_t exponent() const noexcept { return exponent_; }
  bool is_zero() const noexcept { return mantissa_.is_zero(); }

  /// Multiplies by 2^k exactly.
  Dyadic scaled(std::int64_t k) const;

  /// Lossy conversion for the numerics boundary.
  double to_double_lossy() const;

  /// "m*2^e", e.g. "3*2^-3".
  std::string to_string() const;
  /// Parses "m*2^e", or a plain nonnegative integer. Throws std::invalid_argument.
  static Dyadic parse(std::string_view text);

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
  /// Throws std::domain_error if the result would be negative.
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b);

  friend bool operator==(const Dyadic& a, const Dyadic& b) = default;
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

  Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
  Dyadic& operator*=(const Dyadic& o) { return *this = *this * o; }

 private:
  void canonicalize();

  BigInt mantissa_ = 0;
  std::int64_t exponent_ = 0;
};

/// Exact quotient a / b. Throws std::domain_error when b is zero or the
/// quotient is not dyadic.
Dyadic exact_div(const Dyadic& a, const Dyadic& b);

/// Integer value of a dyadic; throws std::domain_error if not an integer.
BigInt to_integer(const Dyadic& d);

}  // namespace decoup
