#include "rsub/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rsub/sampling.hpp"

namespace rsub {

namespace {

double parse_param(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("noise: cannot parse " + what + " '" + text + "'");
  }
  if (pos != text.size())
    throw std::invalid_argument("noise: trailing characters in " + what + " '" +
                                text + "'");
  return v;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

double draw_noise(const NoiseSpec& noise, SeededRng& rng) {
  switch (noise.kind) {
    case NoiseSpec::Kind::gaussian:
      return noise.sigma * rng.next_normal();
    case NoiseSpec::Kind::student_t:
      return noise.sigma * rng.next_student_t(noise.shape);
    case NoiseSpec::Kind::pareto:
      return rng.next_symmetric_pareto(noise.shape, noise.sigma);
  }
  return 0.0;  // unreachable
}

Vector sparse_beta(const EnvironmentSpec& spec) {
  Vector beta = Vector::Zero(spec.p);
  beta.head(spec.s).setConstant(spec.beta_scale);
  return beta;
}

void check_spec(const EnvironmentSpec& spec, const char* who) {
  const auto violations = spec.validate();
  if (violations.empty()) return;
  std::string msg = who;
  msg += ":";
  for (const auto& v : violations) msg += " " + v + ";";
  throw std::invalid_argument(msg);
}

}  // namespace

NoiseSpec NoiseSpec::parse(const std::string& text) {
  // Grammar: kind[:param[,param]] -- gaussian:sigma, student_t:nu[,sigma],
  // pareto:alpha[,sigma].
  const std::string t = trim(text);
  const std::size_t colon = t.find(':');
  const std::string kind_str = trim(colon == std::string::npos ? t : t.substr(0, colon));
  std::vector<std::string> params;
  if (colon != std::string::npos) {
    std::string rest = t.substr(colon + 1);
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = rest.find(',', start);
      if (comma == std::string::npos) {
        params.push_back(trim(rest.substr(start)));
        break;
      }
      params.push_back(trim(rest.substr(start, comma - start)));
      start = comma + 1;
    }
  }

  NoiseSpec spec;
  if (kind_str == "gaussian") {
    spec.kind = Kind::gaussian;
    spec.shape = 0.0;
    if (params.size() > 1)
      throw std::invalid_argument("noise: gaussian takes one parameter (sigma)");
    spec.sigma = params.empty() ? 1.0 : parse_param(params[0], "sigma");
  } else if (kind_str == "student_t") {
    spec.kind = Kind::student_t;
    if (params.empty() || params.size() > 2)
      throw std::invalid_argument("noise: student_t takes nu[,sigma]");
    spec.shape = parse_param(params[0], "nu");
    spec.sigma = params.size() > 1 ? parse_param(params[1], "sigma") : 1.0;
  } else if (kind_str == "pareto") {
    spec.kind = Kind::pareto;
    if (params.empty() || params.size() > 2)
      throw std::invalid_argument("noise: pareto takes alpha[,sigma]");
    spec.shape = parse_param(params[0], "alpha");
    spec.sigma = params.size() > 1 ? parse_param(params[1], "sigma") : 1.0;
  } else {
    throw std::invalid_argument("noise: unknown kind '" + kind_str +
                                "' (expected gaussian|student_t|pareto)");
  }
  const auto violations = spec.validate();
  if (!violations.empty()) throw std::invalid_argument("noise: " + violations[0]);
  return spec;
}

std::string NoiseSpec::str() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::gaussian:
      os << "gaussian:" << sigma;
      break;
    case Kind::student_t:
      os << "student_t:" << shape << "," << sigma;
      break;
    case Kind::pareto:
      os << "pareto:" << shape << "," << sigma;
      break;
  }
  return os.str();
}

std::vector<std::string> NoiseSpec::validate() const {
  std::vector<std::string> out;
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    out.push_back("sigma must be finite and >= 0");
  if (kind != Kind::gaussian && (!(shape > 0.0) || !std::isfinite(shape)))
    out.push_back("shape parameter must be finite and > 0");
  return out;
}

std::vector<std::string> EnvironmentSpec::validate() const {
  std::vector<std::string> out;
  if (n < 1) out.push_back("n must be >= 1");
  if (p < 1) out.push_back("p must be >= 1");
  if (s < 0) out.push_back("s must be >= 0");
  if (s > p) out.push_back("s exceeds p");
  if (!std::isfinite(beta_scale)) out.push_back("beta_scale must be finite");
  for (const auto& v : noise.validate()) out.push_back(v);
  if (!(contamination >= 0.0) || contamination >= 0.5)
    out.push_back("contamination must lie in [0, 0.5)");
  if (!(corruption_magnitude >= 0.0) || !std::isfinite(corruption_magnitude))
    out.push_back("c_mag must be finite and >= 0");
  if (!(ar1_phi > -1.0) || !(ar1_phi < 1.0))
    out.push_back("ar1 phi must lie in (-1, 1)");
  return out;
}

Dataset corrupt_rows(Dataset d, double epsilon, double c_mag, SeededRng& rng) {
  if (!(epsilon >= 0.0) || epsilon >= 0.5)
    throw std::invalid_argument("corrupt_rows: epsilon must lie in [0, 0.5)");
  if (!(c_mag >= 0.0) || !std::isfinite(c_mag))
    throw std::invalid_argument("corrupt_rows: c_mag must be finite and >= 0");
  const Index n = d.n();
  const Index k = static_cast<Index>(std::floor(epsilon * static_cast<double>(n)));
  if (k == 0) return d;

  SubsampleDraw sel = draw_uniform_without_replacement(n, k, rng);
  std::sort(sel.indices.begin(), sel.indices.end());
  for (Index i : sel.indices) {
    for (Index j = 0; j < d.p(); ++j) d.x(i, j) = rng.next_uniform(-c_mag, c_mag);
    if (d.y) (*d.y)(i) = rng.next_uniform(-c_mag, c_mag);
  }
  d.meta.contamination = epsilon;
  d.meta.corruption_magnitude = c_mag;
  d.meta.corrupted_rows = std::move(sel.indices);
  return d;
}

Dataset gen_linear(const EnvironmentSpec& spec, SeededRng rng) {
  check_spec(spec, "gen_linear");
  const Index n = spec.n;
  const Index p = spec.p;

  Dataset d;
  d.x.resize(n, p);
  const double phi = spec.ar1_phi;
  const double blend = std::sqrt(1.0 - phi * phi);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) d.x(i, j) = rng.next_normal();
    if (phi != 0.0 && i > 0)
      d.x.row(i) = phi * d.x.row(i - 1) + blend * d.x.row(i);
  }

  Vector beta = sparse_beta(spec);

  Vector y(n);
  for (Index i = 0; i < n; ++i)
    y(i) = d.x.row(i).dot(beta) + draw_noise(spec.noise, rng);
  d.y = std::move(y);
  d.truth = std::move(beta);
  d.meta.noise = spec.noise.str();
  d.meta.dependence =
      phi == 0.0 ? std::string("iid") : "ar1:" + std::to_string(phi);
  d.meta.contamination = spec.contamination;
  d.meta.corruption_magnitude = spec.corruption_magnitude;

  if (spec.contamination > 0.0)
    d = corrupt_rows(std::move(d), spec.contamination, spec.corruption_magnitude, rng);
  return d;
}

Dataset gen_location(const EnvironmentSpec& spec, SeededRng rng) {
  check_spec(spec, "gen_location");
  const Index n = spec.n;
  const Index p = spec.p;

  Dataset d;
  d.x.resize(n, p);
  const double phi = spec.ar1_phi;
  const double blend = std::sqrt(1.0 - phi * phi);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) d.x(i, j) = draw_noise(spec.noise, rng);
    if (phi != 0.0 && i > 0)
      d.x.row(i) = phi * d.x.row(i - 1) + blend * d.x.row(i);
  }
  Vector beta = sparse_beta(spec);
  d.x.rowwise() += beta.transpose();

  d.truth = std::move(beta);
  d.meta.noise = spec.noise.str();
  d.meta.dependence =
      phi == 0.0 ? std::string("iid") : "ar1:" + std::to_string(phi);
  d.meta.contamination = spec.contamination;
  d.meta.corruption_magnitude = spec.corruption_magnitude;

  if (spec.contamination > 0.0)
    d = corrupt_rows(std::move(d), spec.contamination, spec.corruption_magnitude, rng);
  return d;
}

}  // namespace rsub
