#include "rsub/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rsub {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;  // 2^-53
constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      state_(mix64(seed + kGamma) ^ mix64(stream_id + 2 * kGamma)) {}

std::uint64_t SeededRng::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

double SeededRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * kTwoPow53Inv;
}

double SeededRng::next_open_double() {
  return static_cast<double>((next_u64() >> 11) + 1) * kTwoPow53Inv;
}

double SeededRng::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

std::uint64_t SeededRng::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n must be positive");
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double SeededRng::next_normal() {
  const double u1 = next_open_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double SeededRng::next_gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("next_gamma: shape must be > 0");
  if (shape < 1.0) {
    const double g = next_gamma(shape + 1.0);
    const double u = next_open_double();
    return g * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang (2000) squeeze method.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_open_double();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double SeededRng::next_student_t(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("next_student_t: nu must be > 0");
  const double z = next_normal();
  const double chi2 = 2.0 * next_gamma(0.5 * nu);
  return z / std::sqrt(chi2 / nu);
}

double SeededRng::next_symmetric_pareto(double alpha, double sigma) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("next_symmetric_pareto: alpha must be > 0");
  const double u = next_open_double();
  const double mag = sigma * (std::pow(u, -1.0 / alpha) - 1.0);
  const double sign = (next_u64() & 1ull) ? 1.0 : -1.0;
  return sign * mag;
}

}  // namespace rsub
