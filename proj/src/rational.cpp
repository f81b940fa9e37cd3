#include "superhedge/rational.hpp"

#include <charconv>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "superhedge/errors.hpp"

namespace superhedge {
namespace {

__int128 wide_gcd(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits(__int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

std::int64_t parse_integer(std::string_view digits, std::string_view whole) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw ValidationError("invalid rational '" + std::string(whole) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  *this = from_wide(numerator, denominator);
}

Rational Rational::from_wide(__int128 numerator, __int128 denominator) {
  if (denominator == 0) throw std::domain_error("rational with zero denominator");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  __int128 g = wide_gcd(numerator, denominator);
  if (g > 1) {
    numerator /= g;
    denominator /= g;
  }
  if (!fits(numerator) || !fits(denominator)) throw std::overflow_error("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(numerator);
  r.den_ = static_cast<std::int64_t>(denominator);
  return r;
}

Rational Rational::parse(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) throw ValidationError("empty rational");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::int64_t p = parse_integer(trim(s.substr(0, slash)), text);
    std::int64_t q = parse_integer(trim(s.substr(slash + 1)), text);
    if (q == 0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
    return Rational(p, q);
  }

  bool negative = false;
  std::string_view body = s;
  if (body.front() == '+' || body.front() == '-') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  std::string_view int_part = body;
  std::string_view frac_part;
  if (auto dot = body.find('.'); dot != std::string_view::npos) {
    int_part = body.substr(0, dot);
    frac_part = body.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) {
    throw ValidationError("invalid rational '" + std::string(text) + "'");
  }
  if (frac_part.size() > 6) {
    throw ValidationError("more than six fraction digits in '" + std::string(text) + "'");
  }
  for (char c : int_part) {
    if (c < '0' || c > '9') throw ValidationError("invalid rational '" + std::string(text) + "'");
  }
  for (char c : frac_part) {
    if (c < '0' || c > '9') throw ValidationError("invalid rational '" + std::string(text) + "'");
  }

  std::int64_t whole = int_part.empty() ? 0 : parse_integer(int_part, text);
  std::int64_t scale = 1;
  std::int64_t frac = 0;
  for (char c : frac_part) {
    scale *= 10;
    frac = frac * 10 + (c - '0');
  }
  __int128 numerator = static_cast<__int128>(whole) * scale + frac;
  if (negative) numerator = -numerator;
  return from_wide(numerator, scale);
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

Rational& Rational::operator+=(const Rational& rhs) {
  *this = from_wide(static_cast<__int128>(num_) * rhs.den_ + static_cast<__int128>(rhs.num_) * den_,
                    static_cast<__int128>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) { return *this += -rhs; }

Rational& Rational::operator*=(const Rational& rhs) {
  *this = from_wide(static_cast<__int128>(num_) * rhs.num_, static_cast<__int128>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.num_ == 0) throw std::domain_error("rational division by zero");
  *this = from_wide(static_cast<__int128>(num_) * rhs.den_, static_cast<__int128>(den_) * rhs.num_);
  return *this;
}

std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs) {
  __int128 a = static_cast<__int128>(lhs.num_) * rhs.den_;
  __int128 b = static_cast<__int128>(rhs.num_) * lhs.den_;
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

}  // namespace superhedge
