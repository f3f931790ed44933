#include "ace/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ace::rng {

namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t state = x;
  return splitmix_next(state);
}

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix_next(state);
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Xoshiro256::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("below(0)");
  // Lemire's multiply-shift rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (lo < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Xoshiro256::unit() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

Xoshiro256 substream(std::uint64_t seed, std::uint64_t index) {
  return Xoshiro256(mix64(seed + (index + 1) * 0x9E3779B97F4A7C15ULL));
}

namespace {

// Sequential-search inversion; expected O(n*p). Valid for n*p modest.
std::int64_t binomial_inversion(Xoshiro256& gen, std::int64_t n, double p) {
  const double q = 1.0 - p;
  const double qn = std::exp(static_cast<double>(n) * std::log(q));
  const double np = static_cast<double>(n) * p;
  const auto bound =
      std::min<std::int64_t>(n, static_cast<std::int64_t>(np + 10.0 * std::sqrt(np * q + 1.0)));
  std::int64_t x = 0;
  double px = qn;
  double u = gen.unit();
  while (u > px) {
    ++x;
    if (x > bound) {
      x = 0;
      px = qn;
      u = gen.unit();
    } else {
      u -= px;
      px = (static_cast<double>(n - x + 1) * p * px) / (static_cast<double>(x) * q);
    }
  }
  return x;
}

// BTPE (binomial triangle-parallelogram-exponential) rejection sampler.
// Requires p <= 0.5 and n * p >= 30 so the dominating curve is valid.
std::int64_t binomial_btpe(Xoshiro256& gen, std::int64_t n, double p) {
  const double r = p;
  const double q = 1.0 - r;
  const double nrq = static_cast<double>(n) * r * q;
  const double fm = static_cast<double>(n) * r + r;
  const auto m = static_cast<std::int64_t>(fm);
  const double p1 = std::floor(2.195 * std::sqrt(nrq) - 4.6 * q) + 0.5;
  const double xm = static_cast<double>(m) + 0.5;
  const double xl = xm - p1;
  const double xr = xm + p1;
  const double c = 0.134 + 20.5 / (15.3 + static_cast<double>(m));
  double a = (fm - xl) / (fm - xl * r);
  const double laml = a * (1.0 + a / 2.0);
  a = (xr - fm) / (xr * q);
  const double lamr = a * (1.0 + a / 2.0);
  const double p2 = p1 * (1.0 + 2.0 * c);
  const double p3 = p2 + c / laml;
  const double p4 = p3 + c / lamr;

  for (;;) {
    const double u = gen.unit() * p4;
    double v = gen.unit();
    std::int64_t y;

    if (u <= p1) {
      // Triangular region: accept immediately.
      y = static_cast<std::int64_t>(std::floor(xm - p1 * v + u));
      return y;
    }
    if (u <= p2) {
      // Parallelogram region.
      const double x = xl + (u - p1) / c;
      v = v * c + 1.0 - std::fabs(xm - x) / p1;
      if (v > 1.0) continue;
      y = static_cast<std::int64_t>(std::floor(x));
    } else if (u <= p3) {
      // Left exponential tail.
      if (v <= 0.0) continue;
      y = static_cast<std::int64_t>(std::floor(xl + std::log(v) / laml));
      if (y < 0) continue;
      v = v * (u - p2) * laml;
    } else {
      // Right exponential tail.
      if (v <= 0.0) continue;
      y = static_cast<std::int64_t>(std::floor(xr - std::log(v) / lamr));
      if (y > n) continue;
      v = v * (u - p3) * lamr;
    }

    const std::int64_t k = y > m ? y - m : m - y;
    if (k <= 20 || static_cast<double>(k) >= nrq / 2.0 - 1.0) {
      // Evaluate the pmf ratio f(y)/f(m) directly.
      const double s = r / q;
      const double aa = s * static_cast<double>(n + 1);
      double f = 1.0;
      if (m < y) {
        for (std::int64_t i = m + 1; i <= y; ++i) f *= aa / static_cast<double>(i) - s;
      } else if (m > y) {
        for (std::int64_t i = y + 1; i <= m; ++i) f /= aa / static_cast<double>(i) - s;
      }
      if (v <= f) return y;
      continue;
    }

    // Squeeze around the log pmf ratio.
    const double kd = static_cast<double>(k);
    const double rho =
        (kd / nrq) * ((kd * (kd / 3.0 + 0.625) + 0.1666666666666666) / nrq + 0.5);
    const double t = -kd * kd / (2.0 * nrq);
    const double big_a = std::log(v);
    if (big_a < t - rho) return y;
    if (big_a > t + rho) continue;

    // Final acceptance: Stirling-corrected exact log pmf ratio.
    const double x1 = static_cast<double>(y + 1);
    const double f1 = static_cast<double>(m + 1);
    const double z = static_cast<double>(n + 1 - m);
    const double w = static_cast<double>(n - y + 1);
    const double x2 = x1 * x1;
    const double f2 = f1 * f1;
    const double z2 = z * z;
    const double w2 = w * w;
    const double t2 =
        xm * std::log(f1 / x1) + (static_cast<double>(n - m) + 0.5) * std::log(z / w) +
        static_cast<double>(y - m) * std::log(w * r / (x1 * q)) +
        (13680.0 - (462.0 - (132.0 - (99.0 - 140.0 / f2) / f2) / f2) / f2) / f1 / 166320.0 +
        (13680.0 - (462.0 - (132.0 - (99.0 - 140.0 / z2) / z2) / z2) / z2) / z / 166320.0 +
        (13680.0 - (462.0 - (132.0 - (99.0 - 140.0 / x2) / x2) / x2) / x2) / x1 / 166320.0 +
        (13680.0 - (462.0 - (132.0 - (99.0 - 140.0 / w2) / w2) / w2) / w2) / w / 166320.0;
    if (big_a <= t2) return y;
  }
}

}  // namespace

std::int64_t binomial(Xoshiro256& gen, std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial with negative n");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial needs p in [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  const bool flipped = p > 0.5;
  const double r = flipped ? 1.0 - p : p;
  const std::int64_t x = (static_cast<double>(n) * r <= 30.0)
                             ? binomial_inversion(gen, n, r)
                             : binomial_btpe(gen, n, r);
  return flipped ? n - x : x;
}

}  // namespace ace::rng
