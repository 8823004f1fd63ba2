#pragma once

#include <cstdint>

#include "rsub/types.hpp"

namespace rsub {

// Deterministic random stream, pinned to an exact algorithm so that results
// are reproducible across platforms and library versions.
//
// Generator: SplitMix64 (Steele, Lea & Flood's mix; the java.util.SplittableRandom
// finalizer). State advances by the golden-ratio increment GAMMA and each output
// is mix64(state):
//
//   GAMMA = 0x9E3779B97F4A7C15
//   mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//             z ^= z >> 27; z *= 0x94D049BB133111EB;
//             z ^= z >> 31; return z;
//
// Stream derivation: state0 = mix64(seed + GAMMA) ^ mix64(stream_id + 2*GAMMA),
// so (seed, stream_id) pairs give independent, individually reproducible streams.
//
// Derived variates use fixed recipes (documented per method) built only on
// next_u64(), never on std::<random> distributions, whose output is
// implementation-defined. Box-Muller and the t/gamma samplers call libm
// (log/cos/pow); on IEEE-754 platforms with a correctly rounded libm the
// streams are bit-identical, otherwise they can differ in the last ulp.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  // (u64 >> 11) * 2^-53, uniform on [0, 1).
  double next_double();
  // ((u64 >> 11) + 1) * 2^-53, uniform on (0, 1]; safe as a log() argument.
  double next_open_double();
  // Uniform on [lo, hi): lo + (hi - lo) * next_double().
  double next_uniform(double lo, double hi);
  // Uniform integer in [0, n) via the 128-bit multiply-shift reduction.
  std::uint64_t next_below(std::uint64_t n);

  // Standard normal via Box-Muller, cosine branch only (no spare cached):
  // sqrt(-2 ln u1) * cos(2 pi u2) with u1 open, u2 half-open. Two u64 each.
  double next_normal();

  // Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 is boosted through
  // G(a) = G(a+1) * U^(1/a) with U drawn after the boosted variate.
  double next_gamma(double shape);

  // Student-t with nu > 0 d.o.f.: Z / sqrt(chi2_nu / nu), chi2_nu = 2*Gamma(nu/2).
  // Draw order: Z first, then the gamma.
  double next_student_t(double nu);

  // Symmetric Pareto (two-sided Lomax), tail index alpha > 0, scale sigma:
  // magnitude sigma * (U^(-1/alpha) - 1) with U = next_open_double(), then a
  // sign from the parity of one next_u64() (odd -> +1, even -> -1).
  double next_symmetric_pareto(double alpha, double sigma = 1.0);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
};

}  // namespace rsub
