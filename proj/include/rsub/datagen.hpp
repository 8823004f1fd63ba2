#pragma once

#include <string>
#include <vector>

#include "rsub/dataset.hpp"
#include "rsub/rng.hpp"

namespace rsub {

// Additive noise family, parsed from/printed as "kind:param[,param]",
// e.g. "gaussian:1.0", "student_t:3,2.0", "pareto:2.5,1.0".
struct NoiseSpec {
  enum class Kind { gaussian, student_t, pareto };

  Kind kind = Kind::gaussian;
  double sigma = 1.0;   // scale, all kinds
  double shape = 3.0;   // student_t: d.o.f.; pareto: tail index; unused for gaussian

  static NoiseSpec parse(const std::string& text);
  std::string str() const;
  std::vector<std::string> validate() const;
};

struct EnvironmentSpec {
  Index n = 0;
  Index p = 0;
  Index s = 0;                 // number of leading nonzero coefficients
  double beta_scale = 1.0;     // value of each nonzero coefficient
  NoiseSpec noise;
  double contamination = 0.0;  // fraction of rows replaced by junk, in [0, 0.5)
  double corruption_magnitude = 1e3;
  double ar1_phi = 0.0;        // 0 = iid rows, else AR(1) row dependence, |phi| < 1

  std::vector<std::string> validate() const;
};

// Replaces floor(epsilon * n) uniformly chosen rows (X and y alike) with
// Uniform(-c_mag, c_mag) entries, recording which rows in meta. epsilon == 0
// returns the input unchanged and consumes no randomness.
Dataset corrupt_rows(Dataset d, double epsilon, double c_mag, SeededRng& rng);

// Linear model data: standard-normal design rows (AR(1)-blended when phi != 0),
// beta = beta_scale on the first s coordinates, y = X beta + noise, then
// optional row corruption. Draw order: X row by row, then noise, then
// corruption. truth = beta.
Dataset gen_linear(const EnvironmentSpec& spec, SeededRng rng);

// Location-model data for mean estimation: rows = beta + noise, where noise is
// drawn per coordinate from spec.noise and beta is the same sparse vector as in
// gen_linear. No response column. truth = beta. Draw order: noise row by row
// (AR(1)-blended when phi != 0), then corruption.
Dataset gen_location(const EnvironmentSpec& spec, SeededRng rng);

}  // namespace rsub
