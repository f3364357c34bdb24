// Command-line front end. Talks to the library only through the C interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixlab/mixlab.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRegime = 3;
constexpr int kExitNumerical = 4;

struct Globals {
  std::string out = ".";
  std::uint64_t seed = 0;
  std::string format = "csv";
  int jobs = 1;
  bool strict = false;
};

struct CliFailure {
  int exit_code;
};

int exit_code_for(mixlab_status s) {
  switch (s) {
    case MIXLAB_OK: return 0;
    case MIXLAB_ERR_REGIME: return kExitRegime;
    case MIXLAB_ERR_NUMERICAL_ABORT:
    case MIXLAB_ERR_NON_CONVERGENCE:
    case MIXLAB_ERR_NOT_SPD:
    case MIXLAB_ERR_INTERNAL: return kExitNumerical;
    default: return kExitConfig;
  }
}

void check(mixlab_status s, const char* what) {
  if (s == MIXLAB_OK) return;
  std::cerr << "error: " << what << ": " << mixlab_status_name(s) << ": " << mixlab_last_error() << '\n';
  throw CliFailure{exit_code_for(s)};
}

[[noreturn]] void config_error(const std::string& msg) {
  std::cerr << "error: " << msg << '\n';
  throw CliFailure{kExitConfig};
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { mixlab_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) config_error("cannot write " + path.string());
  out << content;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    config_error(what + ": " + e.what());
  }
}

using ProblemPtr = std::unique_ptr<mixlab_problem, decltype(&mixlab_problem_free)>;

// A path to a problem document, or a generator kind seeded with --seed.
ProblemPtr open_problem(const std::string& source, const json& params, std::uint64_t seed) {
  mixlab_problem* p = nullptr;
  if (fs::exists(source)) {
    check(mixlab_problem_load(source.c_str(), &p), "loading problem");
  } else {
    check(mixlab_problem_generate(source.c_str(), params.dump().c_str(), seed, &p), "generating problem");
  }
  return {p, mixlab_problem_free};
}

void write_manifest(const Globals& g, const std::string& command, const json& config,
                    const std::vector<std::string>& files) {
  // The library computes the canonical hash for sweeps; here the config is small
  // enough to store verbatim.
  json doc = {{"command", command},
              {"config", config},
              {"seeds", {g.seed}},
              {"files", files},
              {"versions", {{"mixlab", mixlab_version()}}}};
  write_text(fs::path(g.out) / "manifest.json", doc.dump(2) + "\n");
}

int cmd_quad(const Globals& g, double R, double eta, double alpha, int T, long long N, double c) {
  mixlab_quad* q = nullptr;
  check(mixlab_quad_simulate(R, eta, alpha, T, N, c, &q), "quad");
  std::unique_ptr<mixlab_quad, decltype(&mixlab_quad_free)> guard(q, mixlab_quad_free);
  OwnedString csv, report;
  check(mixlab_quad_trace_csv(q, &csv.p), "quad trace");
  check(mixlab_quad_report_json(q, &report.p), "quad report");
  write_text(fs::path(g.out) / "quad_trace.csv", csv.str());
  write_text(fs::path(g.out) / "quad_report.json", report.str() + "\n");
  write_manifest(g, "quad", {{"R", R}, {"eta", eta}, {"alpha", alpha}, {"T", T}, {"N", N}, {"c", c}},
                 {"quad_trace.csv", "quad_report.json"});
  std::cout << report.str() << '\n';
  return 0;
}

int cmd_run(const Globals& g, const std::string& config_path, const std::string& problem_arg, json overrides) {
  json cfg = config_path.empty() ? json::object() : parse_json(read_text(config_path), config_path);
  for (auto& [key, value] : overrides.items()) cfg[key] = value;
  if (g.strict) cfg["strict_regime"] = true;
  if (!cfg.contains("seed")) cfg["seed"] = g.seed;

  ProblemPtr problem(nullptr, mixlab_problem_free);
  if (!problem_arg.empty()) {
    problem = open_problem(problem_arg, json::object(), g.seed);
    cfg.erase("problem");
  } else if (cfg.contains("problem")) {
    mixlab_problem* p = nullptr;
    check(mixlab_problem_from_json(cfg["problem"].dump().c_str(), &p), "problem");
    problem.reset(p);
    cfg.erase("problem");
  } else {
    config_error("run needs a problem (--problem or a \"problem\" entry in the config)");
  }

  mixlab_run* r = nullptr;
  check(mixlab_run_create(problem.get(), cfg.dump().c_str(), 1, &r), "run");
  std::unique_ptr<mixlab_run, decltype(&mixlab_run_free)> guard(r, mixlab_run_free);
  OwnedString body;
  const std::string name = g.format == "json" ? "run.json" : "run.csv";
  check(g.format == "json" ? mixlab_run_json(r, &body.p) : mixlab_run_csv(r, &body.p), "run output");
  write_text(fs::path(g.out) / name, body.str());
  write_manifest(g, "run", cfg, {name});

  int rounds = 0, violations = 0;
  double gap_avg = 0, gap_final = 0;
  check(mixlab_run_summary(r, &rounds, &gap_avg, &gap_final, &violations), "run summary");
  std::printf("rounds=%d gap_avg=%.6g gap_final=%.6g iterate_bound_violations=%d\n", rounds, gap_avg, gap_final,
              violations);
  return 0;
}

int cmd_sweep(const Globals& g, const std::string& plan_path, int jobs_flag) {
  if (plan_path.empty()) config_error("sweep needs --plan");
  const std::string plan = read_text(plan_path);
  const json doc = parse_json(plan, plan_path);
  mixlab_sweep* s = nullptr;
  check(mixlab_sweep_run(plan.c_str(), jobs_flag, &s), "sweep");
  std::unique_ptr<mixlab_sweep, decltype(&mixlab_sweep_free)> guard(s, mixlab_sweep_free);
  check(mixlab_sweep_write(s, g.out.c_str(), g.format.c_str()), "writing sweep");
  const auto budgets = doc.at("budgets").get<std::vector<long long>>();
  for (long long n : budgets) {
    double t = 0;
    check(mixlab_sweep_argmin(s, n, &t), "argmin");
    std::printf("N=%lld argmin_T=%g\n", n, t);
  }
  if (budgets.size() >= 3) {
    for (const char* law : {"log-N", "sqrt-N-log-N"}) {
      OwnedString fit;
      check(mixlab_sweep_fit(s, law, &fit.p), "fit");
      write_text(fs::path(g.out) / (std::string("fit_") + law + ".json"), fit.str() + "\n");
      const json f = json::parse(fit.str());
      std::printf("law=%s r2=%s competing_r2=%s\n", law, f["r2"].dump().c_str(), f["competing_r2"].dump().c_str());
    }
  }
  return 0;
}

int cmd_gradcheck(const Globals& g, const std::string& kind, int m, int d, int trials, double tolerance) {
  const json source = {{"kind", kind}, {"m", m}, {"d", d}};
  OwnedString report;
  int failures = 0;
  check(mixlab_gradcheck(source.dump().c_str(), trials, tolerance, g.seed, &report.p, &failures), "gradcheck");
  write_text(fs::path(g.out) / "gradcheck.json", report.str() + "\n");
  std::cout << report.str() << '\n';
  return failures == 0 ? 0 : kExitCheckFailed;
}

int cmd_decay(const Globals& g, const std::string& problem_arg, const json& params, const json& config) {
  ProblemPtr problem = open_problem(problem_arg, params, g.seed);
  OwnedString report, csv;
  check(mixlab_decay(problem.get(), config.dump().c_str(), &report.p, &csv.p), "decay");
  write_text(fs::path(g.out) / "decay.csv", csv.str());
  write_text(fs::path(g.out) / "decay.json", report.str() + "\n");
  write_manifest(g, "decay", config, {"decay.csv", "decay.json"});
  const json r = json::parse(report.str());
  std::printf("slope=%s target=%s floor=%s\n", r["slope"].dump().c_str(), r["target_slope"].dump().c_str(),
              r["floor"].dump().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilevel data-mixing laboratory"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--seed", g.seed, "Seed for generated problems and noise");
  app.add_option("--format", g.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", g.jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_flag("--strict", g.strict, "Treat theorem-regime violations as errors");

  double R = 200, q_eta = 0.1, q_alpha = 0.5, c = 1;
  int q_T = 1;
  long long q_N = 1000;
  auto* quad = app.add_subcommand("quad", "Closed-form two-domain scalar example");
  quad->add_option("--R", R, "Distance of the start from the optimum");
  quad->add_option("--eta", q_eta, "Inner step size");
  quad->add_option("--alpha", q_alpha, "Weight step size");
  quad->add_option("--T", q_T, "Horizon; 0 selects the recovery horizon");
  quad->add_option("--N", q_N, "Total inner-step budget");
  quad->add_option("--c", c, "Exponent of the recovery horizon");

  std::string run_config, run_problem, algorithm, approx;
  double r_eta = 0, r_alpha = 0, sigma = -1, gamma = 0;
  int r_T = 0, r_K = 0;
  long long r_N = 0;
  auto* runc = app.add_subcommand("run", "Single mixing run");
  runc->add_option("--config", run_config, "Run configuration JSON");
  runc->add_option("--problem", run_problem, "Problem file or generator kind");
  runc->add_option("--algorithm", algorithm, "alg1-exact, alg2-frozen or alg3-stochastic");
  runc->add_option("--eta", r_eta, "Inner step size");
  runc->add_option("--alpha", r_alpha, "Weight step size (default: theorem value)");
  runc->add_option("--T", r_T, "Horizon");
  runc->add_option("--K", r_K, "Rounds");
  runc->add_option("--N", r_N, "Budget");
  runc->add_option("--sigma", sigma, "Gradient noise level");
  runc->add_option("--approx", approx, "Hessian approximator mode");
  runc->add_option("--gamma", gamma, "Isotropic approximator scale");

  std::string plan;
  auto* sweep = app.add_subcommand("sweep", "Budget-constrained horizon sweep");
  sweep->add_option("--plan", plan, "Sweep plan JSON")->required();

  std::string gc_kind = "random-strongly-convex";
  int gc_m = 5, gc_d = 8, trials = 100;
  double tolerance = 1e-5;
  auto* grad = app.add_subcommand("gradcheck", "Exact vs finite-difference hypergradient audit");
  grad->add_option("--problem", gc_kind, "Generator kind");
  grad->add_option("--m", gc_m, "Largest number of domains");
  grad->add_option("--d", gc_d, "Largest dimension");
  grad->add_option("--trials", trials, "Number of random problems");
  grad->add_option("--tolerance", tolerance, "Elementwise tolerance");

  std::string d_problem = "random-strongly-convex", d_approx = "exact-at-optimum";
  double d_eta = 0.1, d_gamma = 0, d_mu = 1, d_L = 1;
  int d_m = 3, d_d = 4, t_max = 400, t_step = 3;
  auto* decay = app.add_subcommand("decay", "Hypergradient error against the horizon");
  decay->add_option("--problem", d_problem, "Problem file or generator kind");
  decay->add_option("--m", d_m, "Domains (generated problems)");
  decay->add_option("--d", d_d, "Dimension (generated problems)");
  decay->add_option("--mu", d_mu, "Lower curvature (generated problems)");
  decay->add_option("--L", d_L, "Upper curvature (generated problems)");
  decay->add_option("--eta", d_eta, "Inner step size");
  decay->add_option("--t-max", t_max, "Largest horizon");
  decay->add_option("--t-step", t_step, "Horizon spacing");
  decay->add_option("--approx", d_approx, "Hessian approximator mode");
  decay->add_option("--gamma", d_gamma, "Isotropic approximator scale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*quad) {
      const int t = q_T == 0 ? mixlab_quad_recovery_horizon(R, q_eta, c) : q_T;
      return cmd_quad(g, R, q_eta, q_alpha, t, q_N, c);
    }
    if (*runc) {
      json o = json::object();
      if (!algorithm.empty()) o["algorithm"] = algorithm;
      if (runc->count("--eta")) o["eta"] = r_eta;
      if (runc->count("--alpha")) o["alpha"] = r_alpha;
      if (r_T > 0) o["T"] = r_T;
      if (r_K > 0) o["K"] = r_K;
      if (r_N > 0) o["N"] = r_N;
      if (sigma >= 0) o["sigma"] = sigma;
      if (!approx.empty()) o["approx_mode"] = approx;
      if (runc->count("--gamma")) o["gamma"] = gamma;
      return cmd_run(g, run_config, run_problem, o);
    }
    if (*sweep) return cmd_sweep(g, plan, app.count("--jobs") ? g.jobs : 0);
    if (*grad) return cmd_gradcheck(g, gc_kind, gc_m, gc_d, trials, tolerance);
    if (*decay) {
      std::vector<int> hs;
      for (int t = 1; t <= t_max; t += std::max(t_step, 1)) hs.push_back(t);
      json cfg = {{"eta", d_eta}, {"horizons", hs}, {"approx_mode", d_approx}};
      if (decay->count("--gamma")) cfg["gamma"] = d_gamma;
      const json params = {{"m", d_m}, {"d", d_d}, {"mu", d_mu}, {"L", d_L}};
      return cmd_decay(g, d_problem, params, cfg);
    }
  } catch (const CliFailure& f) {
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
