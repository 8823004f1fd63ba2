#include "rsub/ais.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsub/robust.hpp"

namespace rsub {

std::vector<std::string> AisConfig::validate(Index n) const {
  std::vector<std::string> out;
  if (m < 1) out.push_back("m must be >= 1");
  if (T < 1) out.push_back("T must be >= 1");
  if (beta && (!std::isfinite(*beta) || *beta < 0.0))
    out.push_back("beta must be finite and >= 0");
  if (!(mix_lambda >= 0.0) || !(mix_lambda <= 0.5))
    out.push_back("lambda must lie in [0, 0.5]");
  if (mode == SampleMode::without_replacement && m > n)
    out.push_back("m exceeds n without replacement");
  if (loss.tag == LossKind::Tag::huber && !(loss.huber_delta > 0.0))
    out.push_back("huber delta must be > 0");
  return out;
}

WeightVector update_weights(const Vector& losses, double beta, double mix_lambda) {
  const Index n = losses.size();
  if (n < 1) throw std::invalid_argument("update_weights: empty losses");
  if (!std::isfinite(beta) || beta < 0.0)
    throw std::invalid_argument("update_weights: beta must be finite and >= 0");
  if (!(mix_lambda >= 0.0) || !(mix_lambda <= 1.0))
    throw std::invalid_argument("update_weights: lambda must lie in [0, 1]");

  double lo = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double l = losses(i);
    if (std::isnan(l) || l == -std::numeric_limits<double>::infinity())
      throw std::invalid_argument("update_weights: losses must not be NaN or -inf");
    lo = std::min(lo, l);
  }
  if (!std::isfinite(lo))
    throw std::invalid_argument("update_weights: all losses are infinite");

  WeightVector wv;
  wv.w.resize(n);
  // shift by the minimum: exact invariance to constant offsets, and the
  // largest exponent is exp(0)
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double u =
        beta == 0.0 ? 1.0 : std::exp(-beta * (losses(i) - lo));
    wv.w(i) = u;
    total += u;
  }
  const double unif = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i)
    wv.w(i) = (1.0 - mix_lambda) * (wv.w(i) / total) + mix_lambda * unif;
  return wv;
}

EstimateResult run_ais(const Dataset& d, const AisConfig& cfg, SeededRng rng) {
  const Index n = d.n();
  const Index p = d.p();
  {
    const auto violations = cfg.validate(n);
    if (!violations.empty()) {
      std::string msg = "run_ais:";
      for (const auto& v : violations) msg += " " + v + ";";
      throw std::invalid_argument(msg);
    }
  }

  const bool location = !d.y.has_value();
  EstimateResult res;
  res.method = "ais";
  res.theta = Vector::Zero(p);

  WeightVector w = WeightVector::uniform(n);
  double beta = cfg.beta.value_or(0.0);
  bool beta_resolved = cfg.beta.has_value();

  for (int t = 0; t < cfg.T; ++t) {
    const SubsampleDraw draw = draw_weighted(w, cfg.m, cfg.mode, rng);

    if (location) {
      // closed-form weighted mean under the self-loss
      double csum = 0.0;
      Vector acc = Vector::Zero(p);
      const double md = static_cast<double>(cfg.m);
      for (Index j = 0; j < draw.m(); ++j) {
        const Index i = draw.indices[static_cast<std::size_t>(j)];
        const double c = 1.0 / (md * w.w(i));
        acc += c * d.x.row(i).transpose();
        csum += c;
      }
      res.theta = acc / csum;
      res.iterations += 1;
    } else {
      EstimateResult inner =
          weighted_erm(cfg.loss, d, draw, w, std::nullopt, res.theta);
      res.theta = std::move(inner.theta);
      res.iterations += inner.iterations;
      for (auto& msg : inner.warnings) {
        if (std::find(res.warnings.begin(), res.warnings.end(), msg) ==
            res.warnings.end())
          res.warnings.push_back(std::move(msg));
      }
    }

    const Vector losses = all_losses(cfg.loss, d, res.theta);
    res.objective_trace.push_back(losses.mean());

    if (!beta_resolved) {
      // scale-free default: inverse of the typical first-round loss
      std::vector<double> buf(losses.data(), losses.data() + n);
      const double med = median(std::move(buf));
      beta = (std::isfinite(med) && med > 1e-300) ? 1.0 / med : 1.0;
      beta_resolved = true;
    }
    w = update_weights(losses, beta, cfg.mix_lambda);
  }

  res.ess = effective_sample_size(w);
  return res;
}

}  // namespace rsub
