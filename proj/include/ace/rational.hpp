#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ace {

/// Exact rational arithmetic on 128-bit integers.
///
/// Values are kept fully reduced with a positive denominator, so equality
/// is plain field comparison and ordering is exact. Every operation checks
/// for 128-bit overflow and throws std::overflow_error if the reduced
/// result would not fit; all effect arithmetic in this project stays many
/// orders of magnitude below that limit.
class Rational {
 public:
  using Int = __int128;

  constexpr Rational() : num_(0), den_(1) {}
  Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT: implicit
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

  static Rational from_int128(Int num, Int den) {
    Rational r;
    r.assign(num, den);
    return r;
  }

  Int num() const { return num_; }
  Int den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  Rational operator+(const Rational& o) const {
    // a/b + c/d = (a*(d/g) + c*(b/g)) / (b*(d/g)) with g = gcd(b, d)
    Int g = gcd(den_, o.den_);
    Int db = den_ / g;
    Int dd = o.den_ / g;
    Int lhs = checked_mul(num_, dd);
    Int rhs = checked_mul(o.num_, db);
    Int num = checked_add(lhs, rhs);
    Int den = checked_mul(den_, dd);
    return from_int128(num, den);
  }

  Rational operator-(const Rational& o) const { return *this + (-o); }

  Rational operator*(const Rational& o) const {
    Int g1 = gcd(abs128(num_), o.den_);
    Int g2 = gcd(abs128(o.num_), den_);
    Int num = checked_mul(num_ / g1, o.num_ / g2);
    Int den = checked_mul(den_ / g2, o.den_ / g1);
    return from_int128(num, den);
  }

  Rational operator/(const Rational& o) const {
    if (o.num_ == 0) throw std::domain_error("rational division by zero");
    Rational inv;
    inv.num_ = o.den_;
    inv.den_ = o.num_;
    if (inv.den_ < 0) {
      inv.num_ = -inv.num_;
      inv.den_ = -inv.den_;
    }
    return *this * inv;
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  bool operator==(const Rational& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const {
    // Cross-multiply in 256 bits so comparisons never overflow even when
    // both operands sit near the 128-bit storage limit.
    if (num_ < 0 && o.num_ >= 0) return true;
    if (num_ >= 0 && o.num_ < 0) return false;
    const bool negative = num_ < 0;
    const int cmp = compare_u256(mul_u256(abs_u128(num_), static_cast<unsigned __int128>(o.den_)),
                                 mul_u256(abs_u128(o.num_), static_cast<unsigned __int128>(den_)));
    return negative ? cmp > 0 : cmp < 0;
  }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator<=(const Rational& o) const { return !(o < *this); }
  bool operator>=(const Rational& o) const { return !(*this < o); }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// "629/971", or just "5" when the value is an integer.
  std::string fraction() const {
    std::string s = int128_to_string(num_);
    if (den_ != 1) {
      s += '/';
      s += int128_to_string(den_);
    }
    return s;
  }

  /// Fixed-point rendering, rounding half away from zero.
  /// leading_zero=false drops the integer-part zero ("-.52" style).
  std::string decimal(int places, bool leading_zero = true) const {
    if (places < 0 || places > 30) throw std::invalid_argument("places out of range");
    bool negative = num_ < 0;
    Int n = negative ? -num_ : num_;
    Int scale = 1;
    for (int i = 0; i < places; ++i) scale = checked_mul(scale, Int{10});
    Int scaled = checked_mul(n, scale);
    Int q = scaled / den_;
    Int r = scaled % den_;
    if (2 * r >= den_) q += 1;
    Int ip = q / scale;
    Int fp = q % scale;
    std::string out;
    if (negative && (ip != 0 || fp != 0)) out += '-';
    if (ip != 0 || leading_zero || places == 0) out += int128_to_string(ip);
    if (places > 0) {
      std::string frac = int128_to_string(fp);
      out += '.';
      out.append(places - frac.size(), '0');
      out += frac;
    }
    return out;
  }

  /// Value rendered as a percentage, e.g. 12997/166065 -> "7.83%".
  std::string percent(int places) const {
    return (*this * Rational(100)).decimal(places) + "%";
  }

  static std::string int128_to_string(Int v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v)
                              : static_cast<unsigned __int128>(v);
    char buf[48];
    int pos = 48;
    while (u > 0) {
      buf[--pos] = static_cast<char>('0' + static_cast<int>(u % 10));
      u /= 10;
    }
    std::string s(buf + pos, 48 - pos);
    return neg ? "-" + s : s;
  }

 private:
  void assign(Int num, Int den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    Int g = gcd(abs128(num), den);
    num_ = num / g;
    den_ = den / g;
  }

  static Int abs128(Int v) { return v < 0 ? -v : v; }

  static unsigned __int128 abs_u128(Int v) {
    return v < 0 ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  }

  struct U256 {
    unsigned __int128 hi;
    unsigned __int128 lo;
  };

  static U256 mul_u256(unsigned __int128 a, unsigned __int128 b) {
    const auto a0 = static_cast<std::uint64_t>(a);
    const auto a1 = static_cast<std::uint64_t>(a >> 64);
    const auto b0 = static_cast<std::uint64_t>(b);
    const auto b1 = static_cast<std::uint64_t>(b >> 64);
    const unsigned __int128 p00 = static_cast<unsigned __int128>(a0) * b0;
    const unsigned __int128 p01 = static_cast<unsigned __int128>(a0) * b1;
    const unsigned __int128 p10 = static_cast<unsigned __int128>(a1) * b0;
    const unsigned __int128 p11 = static_cast<unsigned __int128>(a1) * b1;
    unsigned __int128 mid = 0;
    const bool mid_carry = __builtin_add_overflow(p01, p10, &mid);
    unsigned __int128 lo = 0;
    const bool lo_carry = __builtin_add_overflow(p00, mid << 64, &lo);
    const unsigned __int128 hi = p11 + (mid >> 64) +
                                 (static_cast<unsigned __int128>(mid_carry) << 64) +
                                 (lo_carry ? 1 : 0);
    return {hi, lo};
  }

  static int compare_u256(const U256& a, const U256& b) {
    if (a.hi != b.hi) return a.hi < b.hi ? -1 : 1;
    if (a.lo != b.lo) return a.lo < b.lo ? -1 : 1;
    return 0;
  }

  static Int gcd(Int a, Int b) {
    while (b != 0) {
      Int t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  static Int checked_add(Int a, Int b) {
    Int out;
    if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("rational overflow");
    return out;
  }

  static Int checked_mul(Int a, Int b) {
    Int out;
    if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("rational overflow");
    return out;
  }

  Int num_;
  Int den_;
};

}  // namespace ace
