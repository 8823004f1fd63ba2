#include "rsub/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsub/ais.hpp"
#include "rsub/baselines.hpp"
#include "rsub/bench.hpp"
#include "rsub/csv.hpp"
#include "rsub/datagen.hpp"
#include "rsub/stratified.hpp"

namespace rsub {

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 0;

// Flat JSON config files ({"flag": value, ...}) for generate/estimate.
// Expanded into flags before CLI11 sees the args (CLI11 only reads config
// files attached to the root app, and ours belong to subcommands). Keys whose
// flag already appears on the command line are skipped, so flags override.
bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const std::string& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

std::vector<std::string> expand_config_args(const std::vector<std::string>& args) {
  if (args.empty() || (args[0] != "generate" && args[0] != "estimate")) return args;
  std::vector<std::string> out;
  out.reserve(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    out.push_back(args[i]);
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size())
      out.push_back(path = args[++i]);
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
    if (path.empty()) continue;

    std::ifstream in(path);
    if (!in.good())
      throw std::invalid_argument("--config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("--config: invalid JSON in '" + path + "': " +
                                  e.what());
    }
    if (!j.is_object())
      throw std::invalid_argument("--config: '" + path + "' must hold a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string flag = "--" + it.key();
      if (has_flag(args, flag) || has_flag(out, flag)) continue;
      const auto& v = it.value();
      if (v.is_null()) continue;
      if (v.is_structured())
        throw std::invalid_argument("--config: key '" + it.key() +
                                    "' must hold a scalar");
      out.push_back(flag);
      if (v.is_string())
        out.push_back(v.get<std::string>());
      else if (v.is_boolean())
        out.push_back(v.get<bool>() ? "true" : "false");
      else
        out.push_back(v.dump());
    }
  }
  return out;
}

void configure(CLI::App& app) {
  app.option_defaults()->always_capture_default(true);
  app.footer("noise grammar: kind:param[,param] -- gaussian:sigma, "
             "student_t:nu[,sigma], pareto:alpha[,sigma]\n"
             "ROBUST_SUBSAMPLE_THREADS caps bench parallelism (0/unset = one "
             "per hardware thread)");
}

// Flags that mirror EnvironmentSpec.
struct EnvFlags {
  std::int64_t n = 0;
  std::int64_t p = 0;
  std::int64_t s = 0;
  double beta_scale = 1.0;
  std::string noise = "gaussian:1.0";
  double contamination = 0.0;
  double c_mag = 1e3;
  double ar1 = 0.0;

  void attach(CLI::App& app) {
    app.add_option("--n", n, "rows")->required();
    app.add_option("--p", p, "columns")->required();
    app.add_option("--s", s, "leading nonzero coefficients");
    app.add_option("--beta-scale", beta_scale, "value of each nonzero coefficient");
    app.add_option("--noise", noise, "noise spec, kind:param[,param]");
    app.add_option("--contamination", contamination, "corrupted row fraction, [0, 0.5)");
    app.add_option("--c-mag", c_mag, "corruption magnitude");
    app.add_option("--ar1", ar1, "AR(1) row-dependence phi, (-1, 1)");
  }

  EnvironmentSpec resolve() const {
    EnvironmentSpec env;
    env.n = n;
    env.p = p;
    env.s = s;
    env.beta_scale = beta_scale;
    try {
      env.noise = NoiseSpec::parse(noise);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("--noise: ") + e.what());
    }
    env.contamination = contamination;
    env.corruption_magnitude = c_mag;
    env.ar1_phi = ar1;
    const auto violations = env.validate();
    if (!violations.empty()) throw std::invalid_argument(violations[0]);
    return env;
  }
};

std::uint64_t resolve_seed(const CLI::App& app, std::uint64_t seed) {
  if (app.count("--seed") == 0)
    std::cerr << "seed defaulted to " << seed << " (pass --seed to change)\n";
  return seed;
}

void emit(const ordered_json& j, const std::string& out_path) {
  if (out_path.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_file_atomic(out_path, j.dump(2) + "\n");
}

int cmd_generate(CLI::App& sub, const EnvFlags& env_flags, const std::string& model,
                 std::uint64_t seed, const std::string& out) {
  const EnvironmentSpec env = env_flags.resolve();
  if (model != "linear" && model != "location")
    throw std::invalid_argument("--model must be linear or location");
  seed = resolve_seed(sub, seed);

  SeededRng rng(seed, 0);
  Dataset d = model == "linear" ? gen_linear(env, rng) : gen_location(env, rng);
  write_dataset_csv(d, out);

  ordered_json sidecar;
  sidecar["schema"] = 1;
  ordered_json cfg;
  cfg["subcommand"] = "generate";
  cfg["n"] = env.n;
  cfg["p"] = env.p;
  cfg["s"] = env.s;
  cfg["beta-scale"] = env.beta_scale;
  cfg["noise"] = env.noise.str();
  cfg["contamination"] = env.contamination;
  cfg["c-mag"] = env.corruption_magnitude;
  cfg["ar1"] = env.ar1_phi;
  cfg["model"] = model;
  cfg["seed"] = seed;
  cfg["out"] = out;
  sidecar["config"] = std::move(cfg);
  ordered_json meta;
  meta["noise"] = d.meta.noise;
  meta["dependence"] = d.meta.dependence;
  meta["contamination"] = d.meta.contamination;
  meta["corruption_magnitude"] = d.meta.corruption_magnitude;
  meta["corrupted_rows"] = d.meta.corrupted_rows;
  meta["has_y"] = d.y.has_value();
  if (d.truth) {
    std::vector<double> t(d.truth->data(), d.truth->data() + d.truth->size());
    meta["truth"] = std::move(t);
  }
  sidecar["meta"] = std::move(meta);
  write_file_atomic(out + ".json", sidecar.dump(2) + "\n");
  std::cout << "wrote " << out << " (" << d.n() << " x " << d.p()
            << (d.y ? ", with y" : "") << ") and " << out << ".json\n";
  return 0;
}

struct EstimateFlags {
  std::string data;
  std::string method;
  std::int64_t m = -1;  // -1 = not given
  std::string task = "auto";
  // ais
  std::int64_t T = 5;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double lambda = 0.05;
  std::string mode = "with";
  std::string loss = "squared";
  // stratified
  std::int64_t K = 10;
  std::int64_t mom_blocks = 0;
  std::string mom_assignment = "contiguous";
  double gm_tol = 1e-10;
  // baselines
  double ridge_lambda = 0.0;
  double lasso_lambda = std::numeric_limits<double>::quiet_NaN();

  std::uint64_t seed = kDefaultSeed;
  std::string out;
};

int cmd_estimate(CLI::App& sub, EstimateFlags& f) {
  Dataset d = read_dataset_csv(f.data);
  {
    const auto violations = validate_dataset(d);
    if (!violations.empty())
      throw std::invalid_argument("--data: " + violations[0]);
  }

  Task task;
  if (f.task == "auto")
    task = d.y ? Task::regression : Task::mean;
  else if (f.task == "mean")
    task = Task::mean;
  else if (f.task == "regression")
    task = Task::regression;
  else
    throw std::invalid_argument("--task must be auto, mean, or regression");
  if (task == Task::regression && !d.y)
    throw std::invalid_argument("--task regression needs a y column in --data");

  const bool is_baseline =
      f.method == "ols" || f.method == "ridge" || f.method == "lasso";
  if (!is_baseline && f.method != "ais" && f.method != "stratified")
    throw std::invalid_argument(
        "--method must be ais, stratified, ols, ridge, or lasso");
  if (is_baseline && task == Task::mean)
    throw std::invalid_argument("--method " + f.method + " needs a regression task");

  const bool m_given = sub.count("--m") > 0;
  if (m_given && f.m < 1) throw std::invalid_argument("m must be ≥ 1");
  if (!is_baseline && !m_given)
    throw std::invalid_argument("--m is required for --method " + f.method);

  const std::uint64_t seed = resolve_seed(sub, f.seed);
  SeededRng rng(seed, 0);

  EstimateResult fit;
  if (f.method == "ais") {
    AisConfig cfg;
    cfg.m = f.m;
    cfg.T = static_cast<int>(f.T);
    if (!std::isnan(f.beta)) cfg.beta = f.beta;
    cfg.mix_lambda = f.lambda;
    if (f.mode == "with")
      cfg.mode = SampleMode::with_replacement;
    else if (f.mode == "without")
      cfg.mode = SampleMode::without_replacement;
    else
      throw std::invalid_argument("--mode must be with or without");
    try {
      cfg.loss = LossKind::parse(f.loss);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("--loss: ") + e.what());
    }
    if (task == Task::mean) d.y.reset();  // location mode
    fit = run_ais(d, cfg, rng);
  } else if (f.method == "stratified") {
    StratConfig cfg;
    cfg.m = f.m;
    cfg.K = static_cast<int>(f.K);
    cfg.task = task;
    cfg.mom.n_blocks = static_cast<int>(f.mom_blocks);
    if (f.mom_assignment == "contiguous")
      cfg.mom.assignment = MomConfig::Assignment::contiguous;
    else if (f.mom_assignment == "shuffled")
      cfg.mom.assignment = MomConfig::Assignment::shuffled;
    else
      throw std::invalid_argument("--mom-assignment must be contiguous or shuffled");
    cfg.gm_tol = f.gm_tol;
    fit = run_stratified(d, cfg, rng);
  } else {
    BaselineConfig cfg;
    cfg.method = f.method == "ols"    ? BaselineConfig::Method::ols
                 : f.method == "ridge" ? BaselineConfig::Method::ridge
                                       : BaselineConfig::Method::lasso;
    cfg.ridge_lambda = f.ridge_lambda;
    if (!std::isnan(f.lasso_lambda)) cfg.lasso_lambda = f.lasso_lambda;
    if (m_given) cfg.m = f.m;
    fit = run_baseline(d, cfg, rng);
  }

  ordered_json j;
  j["schema"] = 1;
  ordered_json cfg;
  cfg["subcommand"] = "estimate";
  cfg["data"] = f.data;
  cfg["method"] = f.method;
  cfg["task"] = task == Task::mean ? "mean" : "regression";
  if (m_given) cfg["m"] = f.m;
  if (f.method == "ais") {
    cfg["T"] = f.T;
    cfg["beta"] = std::isnan(f.beta) ? ordered_json("auto") : ordered_json(f.beta);
    cfg["lambda"] = f.lambda;
    cfg["mode"] = f.mode;
    cfg["loss"] = f.loss;
  } else if (f.method == "stratified") {
    cfg["K"] = f.K;
    cfg["mom-blocks"] = f.mom_blocks;
    cfg["mom-assignment"] = f.mom_assignment;
    cfg["gm-tol"] = f.gm_tol;
  } else if (f.method == "ridge") {
    cfg["ridge-lambda"] = f.ridge_lambda;
  } else if (f.method == "lasso") {
    cfg["lasso-lambda"] = std::isnan(f.lasso_lambda) ? ordered_json("auto")
                                                     : ordered_json(f.lasso_lambda);
  }
  cfg["seed"] = seed;
  j["config"] = std::move(cfg);
  j["n"] = d.n();
  j["p"] = d.p();
  ordered_json res;
  res["method"] = fit.method;
  std::vector<double> theta(fit.theta.data(), fit.theta.data() + fit.theta.size());
  res["theta"] = std::move(theta);
  res["iterations"] = fit.iterations;
  if (fit.ess) res["ess"] = *fit.ess;
  res["objective_trace"] = fit.objective_trace;
  res["warnings"] = fit.warnings;
  j["result"] = std::move(res);
  emit(j, f.out);
  return 0;
}

int cmd_bench(CLI::App& sub, const std::string& spec_path, std::uint64_t seed_flag,
              const std::string& out, const std::string& csv_out, bool rate_check,
              const std::string& method_filter, double slope_min, double slope_max,
              double r2_min) {
  std::ifstream in(spec_path);
  if (!in) throw std::invalid_argument("--spec: cannot open '" + spec_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("--spec: invalid JSON: " + std::string(e.what()));
  }

  ExperimentSpec spec = experiment_spec_from_json(j);
  if (sub.count("--seed") > 0)
    spec.seed = seed_flag;
  else if (!j.contains("seed"))
    throw std::invalid_argument("--seed is required (no seed in --spec file)");

  const ExperimentReport report = run_experiment(spec);

  if (!out.empty()) write_file_atomic(out, report_to_json(report).dump(2) + "\n");
  if (!csv_out.empty()) write_file_atomic(csv_out, report_to_csv(report));

  int failed = 0;
  for (const auto& c : report.cells) failed += c.ok ? 0 : 1;
  std::cout << "bench: " << report.spec.methods.size() << " methods x "
            << report.spec.m_grid.size() << " m x " << report.spec.replicates
            << " replicates, " << report.cells.size() << " cells (" << failed
            << " failed), seed " << report.spec.seed << "\n";
  for (const auto& rf : report.rate_fits)
    std::cout << "  rate " << rf.method << ": slope " << rf.fit.slope << ", r2 "
              << rf.fit.r2 << " (" << rf.n_points << " points)\n";
  if (!out.empty()) std::cout << "wrote " << out << "\n";
  if (!csv_out.empty()) std::cout << "wrote " << csv_out << "\n";

  if (!rate_check) return 0;

  const RateFit* chosen = nullptr;
  if (method_filter.empty()) {
    if (report.rate_fits.size() != 1)
      throw std::invalid_argument(
          "--method is required when the spec has more than one rate fit");
    chosen = &report.rate_fits[0];
  } else {
    for (const auto& rf : report.rate_fits)
      if (rf.method == method_filter) chosen = &rf;
    if (!chosen)
      throw std::invalid_argument("--method: no rate fit for '" + method_filter +
                                  "' (needs >= 3 usable grid points)");
  }
  const bool ok = chosen->fit.slope >= slope_min && chosen->fit.slope <= slope_max &&
                  chosen->fit.r2 >= r2_min;
  std::cout << "rate-check " << chosen->method << ": slope " << chosen->fit.slope
            << " in [" << slope_min << ", " << slope_max << "]? r2 "
            << chosen->fit.r2 << " >= " << r2_min << "? -> "
            << (ok ? "pass" : "fail") << "\n";
  if (!ok) {
    std::cerr << "rate-check failed\n";
    return 2;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"robust subsampling estimators: data generation, estimation, "
               "benchmarking"};
  app.name("robust-subsample");
  app.require_subcommand(1);
  configure(app);

  // generate
  CLI::App* gen = app.add_subcommand("generate", "write a synthetic dataset CSV");
  configure(*gen);
  gen->add_option("--config", "JSON file mirroring the flags (flags override)");
  EnvFlags env_flags;
  env_flags.attach(*gen);
  std::string model = "linear";
  gen->add_option("--model", model, "linear (regression data) or location (mean data)")
      ->check(CLI::IsMember({"linear", "location"}));
  std::uint64_t gen_seed = kDefaultSeed;
  gen->add_option("--seed", gen_seed, "RNG seed (printed if defaulted)");
  std::string gen_out;
  gen->add_option("--out", gen_out, "output CSV path (sidecar: <out>.json)")->required();

  // estimate
  CLI::App* est = app.add_subcommand("estimate", "fit one estimator on a dataset CSV");
  configure(*est);
  est->add_option("--config", "JSON file mirroring the flags (flags override)");
  EstimateFlags ef;
  est->add_option("--data", ef.data, "input dataset CSV")->required();
  est->add_option("--method", ef.method, "ais | stratified | ols | ridge | lasso")
      ->required();
  est->add_option("--m", ef.m, "subsample size (baselines: omit for full sample)");
  est->add_option("--task", ef.task, "auto | mean | regression")
      ->check(CLI::IsMember({"auto", "mean", "regression"}));
  est->add_option("--T", ef.T, "ais rounds");
  est->add_option("--beta", ef.beta,
                  "ais inverse temperature (default: 1/median first-round loss)");
  est->add_option("--lambda", ef.lambda, "ais uniform mixing floor");
  est->add_option("--mode", ef.mode, "ais draw mode: with | without (replacement)")
      ->check(CLI::IsMember({"with", "without"}));
  est->add_option("--loss", ef.loss, "ais loss: squared | huber[:delta]");
  est->add_option("--K", ef.K, "stratified: number of strata");
  est->add_option("--mom-blocks", ef.mom_blocks,
                  "stratified: median-of-means blocks (0 = floor(sqrt(k)))");
  est->add_option("--mom-assignment", ef.mom_assignment,
                  "stratified: contiguous | shuffled")
      ->check(CLI::IsMember({"contiguous", "shuffled"}));
  est->add_option("--gm-tol", ef.gm_tol, "stratified: geometric-median tolerance");
  est->add_option("--ridge-lambda", ef.ridge_lambda, "ridge penalty");
  est->add_option("--lasso-lambda", ef.lasso_lambda,
                  "lasso penalty (default: 0.1 * lambda_max)");
  est->add_option("--seed", ef.seed, "RNG seed (printed if defaulted)");
  est->add_option("--out", ef.out, "output JSON path (default: stdout)");

  // bench / rate-check share flags
  std::string spec_path, bench_out = "report.json", bench_csv;
  std::uint64_t bench_seed = 0;
  std::string rc_method;
  double slope_min = -0.65, slope_max = -0.35, r2_min = 0.95;

  CLI::App* bench = app.add_subcommand("bench", "run an experiment spec");
  configure(*bench);
  bench->add_option("--spec", spec_path, "experiment spec JSON")->required();
  bench->add_option("--seed", bench_seed, "RNG seed (overrides the spec's seed)");
  bench->add_option("--out", bench_out, "report JSON path");
  bench->add_option("--csv", bench_csv, "also write the per-cell CSV summary here");

  CLI::App* rc = app.add_subcommand(
      "rate-check", "run an experiment spec and test a method's error-rate slope");
  configure(*rc);
  rc->add_option("--spec", spec_path, "experiment spec JSON")->required();
  rc->add_option("--seed", bench_seed, "RNG seed (overrides the spec's seed)");
  rc->add_option("--out", bench_out, "report JSON path");
  rc->add_option("--csv", bench_csv, "also write the per-cell CSV summary here");
  rc->add_option("--method", rc_method, "method name to check (default: the only one)");
  rc->add_option("--slope-min", slope_min, "lower slope bound");
  rc->add_option("--slope-max", slope_max, "upper slope bound");
  rc->add_option("--r2-min", r2_min, "minimum fit R^2");

  try {
    const std::vector<std::string> expanded = expand_config_args(args);
    std::vector<std::string> argv(expanded.rbegin(), expanded.rend());  // CLI11 wants reversed
    app.parse(argv);
    if (gen->parsed()) return cmd_generate(*gen, env_flags, model, gen_seed, gen_out);
    if (est->parsed()) return cmd_estimate(*est, ef);
    if (bench->parsed())
      return cmd_bench(*bench, spec_path, bench_seed, bench_out, bench_csv, false,
                       "", 0, 0, 0);
    return cmd_bench(*rc, spec_path, bench_seed, bench_out, bench_csv, true,
                     rc_method, slope_min, slope_max, r2_min);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace rsub
