#include "rsub/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <thread>

#include "rsub/baselines.hpp"
#include "rsub/csv.hpp"
#include "rsub/robust.hpp"

namespace rsub {

std::string MethodConfig::kind_tag(Kind k) {
  switch (k) {
    case Kind::ais: return "ais";
    case Kind::stratified: return "stratified";
    case Kind::subsample_ols: return "subsample-ols";
    case Kind::subsample_mean: return "subsample-mean";
    case Kind::ridge: return "ridge";
    case Kind::lasso: return "lasso";
    case Kind::full_ols: return "full-ols";
  }
  return "?";
}

std::vector<std::string> ExperimentSpec::validate() const {
  std::vector<std::string> out;
  for (const auto& v : env.validate()) out.push_back("env: " + v);
  if (replicates < 1) out.push_back("replicates must be >= 1");
  if (replicates >= 65536) out.push_back("replicates must be < 65536");
  if (methods.empty()) out.push_back("methods must not be empty");
  if (methods.size() > 256) out.push_back("at most 256 methods");
  if (m_grid.empty()) out.push_back("m_grid must not be empty");
  if (m_grid.size() > 256) out.push_back("at most 256 m_grid entries");
  for (std::size_t q = 0; q < m_grid.size(); ++q) {
    if (m_grid[q] < 1) out.push_back("m_grid entries must be >= 1");
    if (m_grid[q] > env.n) out.push_back("m_grid entry exceeds n");
    if (q > 0 && m_grid[q] <= m_grid[q - 1])
      out.push_back("m_grid must be strictly ascending");
  }
  std::vector<std::string> names;
  for (const auto& mc : methods) {
    const std::string name =
        mc.name.empty() ? MethodConfig::kind_tag(mc.kind) : mc.name;
    if (std::find(names.begin(), names.end(), name) != names.end())
      out.push_back("duplicate method name '" + name + "'");
    names.push_back(name);
    const bool mean_only = mc.kind == MethodConfig::Kind::subsample_mean;
    const bool regression_only =
        mc.kind == MethodConfig::Kind::subsample_ols ||
        mc.kind == MethodConfig::Kind::ridge || mc.kind == MethodConfig::Kind::lasso ||
        mc.kind == MethodConfig::Kind::full_ols;
    if (task == Task::mean && regression_only)
      out.push_back("method '" + name + "' needs a regression task");
    if (task == Task::regression && mean_only)
      out.push_back("method '" + name + "' needs a mean task");
  }
  return out;
}

double mse(const Vector& theta_hat, const Vector& truth) {
  if (theta_hat.size() != truth.size())
    throw std::invalid_argument("mse: length mismatch");
  if (theta_hat.size() == 0) throw std::invalid_argument("mse: empty vectors");
  return (theta_hat - truth).squaredNorm() / static_cast<double>(theta_hat.size());
}

RateFitResult fit_rate(const std::vector<std::pair<double, double>>& errors) {
  if (errors.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 grid points");
  const Index n = static_cast<Index>(errors.size());
  Vector lx(n), ly(n);
  for (Index i = 0; i < n; ++i) {
    const auto& [m, e] = errors[static_cast<std::size_t>(i)];
    if (!(m > 0.0) || !(e > 0.0))
      throw std::invalid_argument("fit_rate: m and error must be positive");
    lx(i) = std::log(m);
    ly(i) = std::log(e);
  }
  const double mx = lx.mean();
  const double my = ly.mean();
  const double sxx = (lx.array() - mx).square().sum();
  if (sxx <= 0.0) throw std::invalid_argument("fit_rate: degenerate m grid");
  const double sxy = ((lx.array() - mx) * (ly.array() - my)).sum();

  RateFitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_tot = (ly.array() - my).square().sum();
  const double ss_res =
      (ly.array() - (fit.intercept + fit.slope * lx.array())).square().sum();
  fit.r2 = ss_tot <= 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

int thread_cap() {
  const char* env = std::getenv("ROBUST_SUBSAMPLE_THREADS");
  long v = 0;
  if (env && *env) v = std::strtol(env, nullptr, 10);
  if (v < 0) v = 0;
  if (v == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    v = hw == 0 ? 1 : static_cast<long>(hw);
  }
  return static_cast<int>(v);
}

namespace {

EstimateResult dispatch_method(const MethodConfig& mc, const Dataset& d, Task task,
                               Index m, SeededRng rng) {
  switch (mc.kind) {
    case MethodConfig::Kind::ais: {
      AisConfig cfg = mc.ais;
      cfg.m = m;
      return run_ais(d, cfg, rng);
    }
    case MethodConfig::Kind::stratified: {
      StratConfig cfg = mc.strat;
      cfg.m = m;
      cfg.task = task;
      return run_stratified(d, cfg, rng);
    }
    case MethodConfig::Kind::subsample_ols:
      return uniform_subsample_estimate(d, Task::regression, m, rng);
    case MethodConfig::Kind::subsample_mean:
      return uniform_subsample_estimate(d, Task::mean, m, rng);
    case MethodConfig::Kind::ridge: {
      BaselineConfig cfg;
      cfg.method = BaselineConfig::Method::ridge;
      cfg.ridge_lambda = mc.ridge_lambda;
      cfg.m = m;
      return run_baseline(d, cfg, rng);
    }
    case MethodConfig::Kind::lasso: {
      BaselineConfig cfg;
      cfg.method = BaselineConfig::Method::lasso;
      cfg.lasso_lambda = mc.lasso_lambda;
      cfg.m = m;
      return run_baseline(d, cfg, rng);
    }
    case MethodConfig::Kind::full_ols:
      return fit_ols(d);
  }
  throw std::invalid_argument("unknown method kind");
}

double median_of(std::vector<double> v) { return median(std::move(v)); }

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  {
    const auto violations = spec.validate();
    if (!violations.empty()) {
      std::string msg = "run_experiment:";
      for (const auto& v : violations) msg += " " + v + ";";
      throw std::invalid_argument(msg);
    }
  }
  const auto t_start = std::chrono::steady_clock::now();

  const int R = spec.replicates;
  const std::size_t J = spec.methods.size();
  const std::size_t Q = spec.m_grid.size();

  ExperimentReport report;
  report.spec = spec;
  report.cells.resize(static_cast<std::size_t>(R) * J * Q);

  // mean task: location data (rows = beta + noise, truth = beta);
  // regression: linear-model data, truth = generating beta
  const auto run_replicate = [&](int r) {
    SeededRng data_rng(spec.seed, static_cast<std::uint64_t>(r));
    Dataset d = spec.task == Task::mean ? gen_location(spec.env, std::move(data_rng))
                                        : gen_linear(spec.env, std::move(data_rng));
    const Vector truth = *d.truth;
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t q = 0; q < Q; ++q) {
        const std::uint64_t sid = kCellStreamBase +
                                  (static_cast<std::uint64_t>(r) << 16) +
                                  (static_cast<std::uint64_t>(j) << 8) +
                                  static_cast<std::uint64_t>(q);
        CellResult cell;
        cell.method = spec.methods[j].name.empty()
                          ? MethodConfig::kind_tag(spec.methods[j].kind)
                          : spec.methods[j].name;
        cell.m = spec.m_grid[q];
        cell.replicate = r;
        cell.stream_id = sid;
        const auto c0 = std::chrono::steady_clock::now();
        try {
          const EstimateResult fit = dispatch_method(
              spec.methods[j], d, spec.task, spec.m_grid[q], SeededRng(spec.seed, sid));
          cell.ok = true;
          cell.mse = mse(fit.theta, truth);
          cell.l2_error = std::sqrt(cell.mse * static_cast<double>(truth.size()));
          cell.warnings = fit.warnings;
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = e.what();
        }
        const auto c1 = std::chrono::steady_clock::now();
        cell.wall_ms =
            std::chrono::duration<double, std::milli>(c1 - c0).count();
        report.cells[(static_cast<std::size_t>(r) * J + j) * Q + q] =
            std::move(cell);
      }
    }
  };

  const int threads = std::min<int>(thread_cap(), R);
  if (threads <= 1) {
    for (int r = 0; r < R; ++r) run_replicate(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          const int r = next.fetch_add(1);
          if (r >= R) return;
          run_replicate(r);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  // deterministic ordered fold over the preallocated slots
  for (std::size_t j = 0; j < J; ++j) {
    std::vector<std::pair<double, double>> rate_points;
    for (std::size_t q = 0; q < Q; ++q) {
      CellAggregate agg;
      agg.method = spec.methods[j].name.empty()
                       ? MethodConfig::kind_tag(spec.methods[j].kind)
                       : spec.methods[j].name;
      agg.m = spec.m_grid[q];
      std::vector<double> mses;
      std::vector<double> errs;
      double wall = 0.0;
      for (int r = 0; r < R; ++r) {
        const CellResult& cell =
            report.cells[(static_cast<std::size_t>(r) * J + j) * Q + q];
        wall += cell.wall_ms;
        if (!cell.ok) {
          ++agg.n_failed;
          continue;
        }
        ++agg.n_ok;
        mses.push_back(cell.mse);
        errs.push_back(cell.l2_error);
      }
      agg.wall_ms_mean = wall / static_cast<double>(R);
      if (agg.n_ok > 0) {
        double mean = 0.0;
        for (double v : mses) mean += v;
        mean /= static_cast<double>(agg.n_ok);
        agg.mse_mean = mean;
        agg.mse_median = median_of(mses);
        agg.l2_median = median_of(errs);
        if (agg.n_ok > 1) {
          double ss = 0.0;
          for (double v : mses) ss += (v - mean) * (v - mean);
          agg.mse_std = std::sqrt(ss / static_cast<double>(agg.n_ok - 1));
        }
        if (agg.l2_median > 0.0)
          rate_points.emplace_back(static_cast<double>(agg.m), agg.l2_median);
      }
      report.aggregates.push_back(std::move(agg));
    }
    if (rate_points.size() >= 3) {
      RateFit rf;
      rf.method = spec.methods[j].name.empty()
                      ? MethodConfig::kind_tag(spec.methods[j].kind)
                      : spec.methods[j].name;
      rf.fit = fit_rate(rate_points);
      rf.n_points = static_cast<int>(rate_points.size());
      report.rate_fits.push_back(std::move(rf));
    }
  }

  const auto t_end = std::chrono::steady_clock::now();
  report.total_wall_ms =
      std::chrono::duration<double, std::milli>(t_end - t_start).count();
  report.timestamp = utc_timestamp();
  return report;
}

namespace {

nlohmann::ordered_json noise_to_json(const NoiseSpec& noise) {
  return noise.str();
}

nlohmann::ordered_json method_to_json(const MethodConfig& mc) {
  nlohmann::ordered_json j;
  j["method"] = MethodConfig::kind_tag(mc.kind);
  j["name"] = mc.name.empty() ? MethodConfig::kind_tag(mc.kind) : mc.name;
  switch (mc.kind) {
    case MethodConfig::Kind::ais:
      j["T"] = mc.ais.T;
      if (mc.ais.beta) j["beta"] = *mc.ais.beta;
      else j["beta"] = "auto";
      j["lambda"] = mc.ais.mix_lambda;
      j["mode"] = mc.ais.mode == SampleMode::with_replacement ? "with" : "without";
      j["loss"] = mc.ais.loss.str();
      break;
    case MethodConfig::Kind::stratified:
      j["K"] = mc.strat.K;
      j["mom_blocks"] = mc.strat.mom.n_blocks;
      j["assignment"] =
          mc.strat.mom.assignment == MomConfig::Assignment::contiguous ? "contiguous"
                                                                       : "shuffled";
      j["gm_tol"] = mc.strat.gm_tol;
      break;
    case MethodConfig::Kind::ridge:
      j["lambda"] = mc.ridge_lambda;
      break;
    case MethodConfig::Kind::lasso:
      if (mc.lasso_lambda) j["lambda"] = *mc.lasso_lambda;
      else j["lambda"] = "auto";
      break;
    default:
      break;
  }
  return j;
}

MethodConfig method_from_json(const nlohmann::json& j) {
  MethodConfig mc;
  const std::string kind = j.at("method").get<std::string>();
  if (kind == "ais") {
    mc.kind = MethodConfig::Kind::ais;
    if (j.contains("T")) mc.ais.T = j.at("T").get<int>();
    if (j.contains("beta") && !j.at("beta").is_string())
      mc.ais.beta = j.at("beta").get<double>();
    if (j.contains("lambda")) mc.ais.mix_lambda = j.at("lambda").get<double>();
    if (j.contains("mode")) {
      const std::string mode = j.at("mode").get<std::string>();
      if (mode == "with") mc.ais.mode = SampleMode::with_replacement;
      else if (mode == "without") mc.ais.mode = SampleMode::without_replacement;
      else throw std::invalid_argument("method mode must be with|without");
    }
    if (j.contains("loss"))
      mc.ais.loss = LossKind::parse(j.at("loss").get<std::string>());
  } else if (kind == "stratified") {
    mc.kind = MethodConfig::Kind::stratified;
    if (j.contains("K")) mc.strat.K = j.at("K").get<int>();
    if (j.contains("mom_blocks")) mc.strat.mom.n_blocks = j.at("mom_blocks").get<int>();
    if (j.contains("assignment")) {
      const std::string a = j.at("assignment").get<std::string>();
      if (a == "contiguous") mc.strat.mom.assignment = MomConfig::Assignment::contiguous;
      else if (a == "shuffled") mc.strat.mom.assignment = MomConfig::Assignment::shuffled;
      else throw std::invalid_argument("assignment must be contiguous|shuffled");
    }
    if (j.contains("gm_tol")) mc.strat.gm_tol = j.at("gm_tol").get<double>();
  } else if (kind == "ols" || kind == "subsample-ols") {
    mc.kind = MethodConfig::Kind::subsample_ols;
  } else if (kind == "mean" || kind == "subsample-mean") {
    mc.kind = MethodConfig::Kind::subsample_mean;
  } else if (kind == "ridge") {
    mc.kind = MethodConfig::Kind::ridge;
    if (j.contains("lambda")) mc.ridge_lambda = j.at("lambda").get<double>();
  } else if (kind == "lasso") {
    mc.kind = MethodConfig::Kind::lasso;
    if (j.contains("lambda") && !j.at("lambda").is_string())
      mc.lasso_lambda = j.at("lambda").get<double>();
  } else if (kind == "full-ols") {
    mc.kind = MethodConfig::Kind::full_ols;
  } else {
    throw std::invalid_argument("unknown method '" + kind + "'");
  }
  if (j.contains("name")) mc.name = j.at("name").get<std::string>();
  return mc;
}

}  // namespace

nlohmann::ordered_json experiment_spec_to_json(const ExperimentSpec& spec) {
  nlohmann::ordered_json j;
  j["env"] = {{"n", spec.env.n},
              {"p", spec.env.p},
              {"s", spec.env.s},
              {"beta_scale", spec.env.beta_scale},
              {"noise", noise_to_json(spec.env.noise)},
              {"contamination", spec.env.contamination},
              {"c_mag", spec.env.corruption_magnitude},
              {"ar1", spec.env.ar1_phi}};
  j["task"] = spec.task == Task::mean ? "mean" : "regression";
  nlohmann::ordered_json methods = nlohmann::ordered_json::array();
  for (const auto& mc : spec.methods) methods.push_back(method_to_json(mc));
  j["methods"] = std::move(methods);
  j["m_grid"] = spec.m_grid;
  j["replicates"] = spec.replicates;
  j["seed"] = spec.seed;
  return j;
}

ExperimentSpec experiment_spec_from_json(const nlohmann::json& j) {
  ExperimentSpec spec;
  const auto& env = j.at("env");
  spec.env.n = env.at("n").get<Index>();
  spec.env.p = env.at("p").get<Index>();
  if (env.contains("s")) spec.env.s = env.at("s").get<Index>();
  if (env.contains("beta_scale"))
    spec.env.beta_scale = env.at("beta_scale").get<double>();
  if (env.contains("noise"))
    spec.env.noise = NoiseSpec::parse(env.at("noise").get<std::string>());
  if (env.contains("contamination"))
    spec.env.contamination = env.at("contamination").get<double>();
  if (env.contains("c_mag"))
    spec.env.corruption_magnitude = env.at("c_mag").get<double>();
  if (env.contains("ar1")) spec.env.ar1_phi = env.at("ar1").get<double>();

  if (j.contains("task")) {
    const std::string task = j.at("task").get<std::string>();
    if (task == "mean") spec.task = Task::mean;
    else if (task == "regression") spec.task = Task::regression;
    else throw std::invalid_argument("task must be mean|regression");
  }
  for (const auto& mj : j.at("methods")) spec.methods.push_back(method_from_json(mj));
  for (const auto& mv : j.at("m_grid")) spec.m_grid.push_back(mv.get<Index>());
  spec.replicates = j.at("replicates").get<int>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["library_version"] = kLibraryVersion;
  j["seed"] = report.spec.seed;
  j["spec"] = experiment_spec_to_json(report.spec);

  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : report.cells) {
    nlohmann::ordered_json cj;
    cj["method"] = c.method;
    cj["m"] = c.m;
    cj["replicate"] = c.replicate;
    cj["stream_id"] = c.stream_id;
    cj["ok"] = c.ok;
    if (c.ok) {
      cj["mse"] = c.mse;
      cj["l2_error"] = c.l2_error;
    } else {
      cj["error"] = c.error;
    }
    if (!c.warnings.empty()) cj["warnings"] = c.warnings;
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);

  nlohmann::ordered_json aggs = nlohmann::ordered_json::array();
  for (const auto& a : report.aggregates) {
    nlohmann::ordered_json aj;
    aj["method"] = a.method;
    aj["m"] = a.m;
    aj["n_ok"] = a.n_ok;
    aj["n_failed"] = a.n_failed;
    aj["mse_mean"] = a.mse_mean;
    aj["mse_median"] = a.mse_median;
    aj["mse_std"] = a.mse_std;
    aj["l2_median"] = a.l2_median;
    aggs.push_back(std::move(aj));
  }
  j["aggregates"] = std::move(aggs);

  nlohmann::ordered_json rates = nlohmann::ordered_json::array();
  for (const auto& r : report.rate_fits) {
    nlohmann::ordered_json rj;
    rj["method"] = r.method;
    rj["slope"] = r.fit.slope;
    rj["intercept"] = r.fit.intercept;
    rj["r2"] = r.fit.r2;
    rj["n_points"] = r.n_points;
    rates.push_back(std::move(rj));
  }
  j["rate_fits"] = std::move(rates);

  // everything volatile lives under these two top-level keys
  nlohmann::ordered_json timing;
  timing["total_wall_ms"] = report.total_wall_ms;
  nlohmann::ordered_json walls = nlohmann::ordered_json::array();
  for (const auto& a : report.aggregates) {
    walls.push_back(nlohmann::ordered_json{
        {"method", a.method}, {"m", a.m}, {"wall_ms_mean", a.wall_ms_mean}});
  }
  timing["cells"] = std::move(walls);
  j["timing"] = std::move(timing);
  j["timestamp"] = report.timestamp;
  return j;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out = "method,m,replicate,mse,wall_ms\n";
  // sorted by (method order, m, replicate)
  const std::size_t J = report.spec.methods.size();
  const std::size_t Q = report.spec.m_grid.size();
  const int R = report.spec.replicates;
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t q = 0; q < Q; ++q) {
      for (int r = 0; r < R; ++r) {
        const CellResult& c =
            report.cells[(static_cast<std::size_t>(r) * J + j) * Q + q];
        out += c.method;
        out += ',';
        out += std::to_string(c.m);
        out += ',';
        out += std::to_string(c.replicate);
        out += ',';
        out += c.ok ? format_double(c.mse) : "nan";
        out += ',';
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", c.wall_ms);
        out += buf;
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace rsub
