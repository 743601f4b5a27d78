#include "decoup/dyadic.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace decoup {

namespace {

// Brings both mantissas to the smaller exponent.
std::pair<BigInt, BigInt> aligned(const Dyadic& a, const Dyadic& b, std::int64_t& e) {
  e = std::min(a.exponent(), b.exponent());
  BigInt ma = a.mantissa() << static_cast<unsigned>(a.exponent() - e);
  BigInt mb = b.mantissa() << static_cast<unsigned>(b.exponent() - e);
  return {std::move(ma), std::move(mb)};
}

}  // namespace

Dyadic::Dyadic(BigInt mantissa, std::int64_t exponent)
    : mantissa_(std::move(mantissa)), exponent_(exponent) {
  if (mantissa_ < 0) throw std::domain_error("Dyadic: negative mantissa");
  canonicalize();
}

void Dyadic::canonicalize() {
  if (mantissa_.is_zero()) {
    exponent_ = 0;
    return;
  }
  const auto tz = boost::multiprecision::lsb(mantissa_);
  if (tz > 0) {
    mantissa_ >>= tz;
    exponent_ += static_cast<std::int64_t>(tz);
  }
}

Dyadic Dyadic::scaled(std::int64_t k) const {
  if (is_zero()) return {};
  Dyadic r = *this;
  r.exponent_ += k;
  return r;
}

double Dyadic::to_double_lossy() const {
  if (is_zero()) return 0.0;
  // Keep the leading 64 bits so the conversion does not overflow for large
  // mantissas; the discarded bits are below double precision anyway.
  const auto bits = boost::multiprecision::msb(mantissa_) + 1;
  if (bits <= 63) {
    return std::ldexp(mantissa_.convert_to<double>(), static_cast<int>(exponent_));
  }
  const auto drop = bits - 63;
  BigInt top = mantissa_ >> drop;
  return std::ldexp(top.convert_to<double>(), static_cast<int>(exponent_ + static_cast<std::int64_t>(drop)));
}

std::string Dyadic::to_string() const {
  return mantissa_.str() + "*2^" + std::to_string(exponent_);
}

Dyadic Dyadic::parse(std::string_view text) {
  auto bad = [&] { return std::invalid_argument("invalid dyadic literal '" + std::string(text) + "'"); };
  const auto star = text.find('*');
  std::string_view mpart = text.substr(0, star);
  if (mpart.empty()) throw bad();
  for (char c : mpart) {
    if (c < '0' || c > '9') throw bad();
  }
  BigInt m{std::string(mpart)};
  std::int64_t e = 0;
  if (star != std::string_view::npos) {
    std::string_view rest = text.substr(star + 1);
    if (rest.size() < 3 || rest.substr(0, 2) != "2^") throw bad();
    rest.remove_prefix(2);
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), e);
    if (ec != std::errc{} || ptr != rest.data() + rest.size()) throw bad();
  }
  return Dyadic(std::move(m), e);
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  std::int64_t e = 0;
  auto [ma, mb] = aligned(a, b, e);
  return Dyadic(ma + mb, e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) {
  if (b.is_zero()) return a;
  std::int64_t e = 0;
  auto [ma, mb] = aligned(a, b, e);
  if (ma < mb) throw std::domain_error("Dyadic: subtraction result is negative");
  return Dyadic(ma - mb, e);
}

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
  if (a.is_zero() || b.is_zero()) return {};
  return Dyadic(a.mantissa() * b.mantissa(), a.exponent() + b.exponent());
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  if (a.is_zero() || b.is_zero()) {
    const bool za = a.is_zero();
    const bool zb = b.is_zero();
    if (za && zb) return std::strong_ordering::equal;
    return za ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  std::int64_t e = 0;
  auto [ma, mb] = aligned(a, b, e);
  if (ma < mb) return std::strong_ordering::less;
  if (mb < ma) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Dyadic exact_div(const Dyadic& a, const Dyadic& b) {
  if (b.is_zero()) throw std::domain_error("Dyadic: division by zero");
  if (a.is_zero()) return {};
  BigInt q;
  BigInt r;
  boost::multiprecision::divide_qr(a.mantissa(), b.mantissa(), q, r);
  if (!r.is_zero()) throw std::domain_error("Dyadic: quotient is not dyadic");
  return Dyadic(std::move(q), a.exponent() - b.exponent());
}

BigInt to_integer(const Dyadic& d) {
  if (d.exponent() < 0) throw std::domain_error("Dyadic: value is not an integer");
  return d.mantissa() << static_cast<unsigned>(d.exponent());
}

}  // namespace decoup
