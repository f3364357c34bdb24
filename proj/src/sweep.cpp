#include "mixlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mixlab/config_io.hpp"
#include "mixlab/emit.hpp"

namespace mixlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
double num_of(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json cell_to_json(const SweepCell& c) {
  return {{"N", c.N},
          {"T", c.T},
          {"replicate", c.replicate},
          {"seed", c.seed},
          {"K", c.K},
          {"gap_avg", num(c.gap_avg)},
          {"gap_last", num(c.gap_last)},
          {"aligned_weight", num(c.aligned_weight)},
          {"hypergrad_err_last", num(c.hypergrad_err_last)},
          {"wall_ms", c.wall_ms},
          {"iterate_bound_checked", c.iterate_bound_checked},
          {"iterate_bound_violations", c.iterate_bound_violations},
          {"error", c.error}};
}

SweepCell cell_from_json(const json& j) {
  SweepCell c;
  c.N = j.at("N").get<long long>();
  c.T = j.at("T").get<int>();
  c.replicate = j.at("replicate").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.K = j.at("K").get<int>();
  c.gap_avg = num_of(j.at("gap_avg"));
  c.gap_last = num_of(j.at("gap_last"));
  c.aligned_weight = num_of(j.at("aligned_weight"));
  c.hypergrad_err_last = num_of(j.at("hypergrad_err_last"));
  c.wall_ms = j.at("wall_ms").get<double>();
  c.iterate_bound_checked = j.at("iterate_bound_checked").get<bool>();
  c.iterate_bound_violations = j.at("iterate_bound_violations").get<int>();
  c.error = j.at("error").get<std::string>();
  return c;
}

fs::path cell_path(const std::string& dir, const SweepCell& c) {
  return fs::path(dir) / ("cell_" + std::to_string(c.N) + "_" + std::to_string(c.T) + "_" +
                          std::to_string(c.replicate) + ".json");
}

SweepCell run_cell(const ProblemSpec& spec, const SweepPlan& plan, double f_star, SweepCell cell) {
  RunConfig cfg;
  cfg.algorithm = plan.algorithm;
  cfg.eta = plan.eta;
  cfg.alpha = plan.alpha;
  cfg.T = cell.T;
  cfg.N = cell.N;
  cfg.theta0 = plan.theta0;
  cfg.approx_mode = plan.approx_mode;
  cfg.gamma = plan.gamma;
  cfg.sigma = plan.sigma;
  cfg.seed = cell.seed;
  cfg.f_star = f_star;
  cfg.record_timing = plan.record_timing;
  try {
    const RunRecord rec = run(spec, cfg);
    cell.K = rec.K;
    cell.gap_avg = rec.gap_avg;
    cell.gap_last = rec.gap_final;
    cell.aligned_weight = rec.w_final[plan.aligned_domain];
    cell.hypergrad_err_last = rec.rounds.size() >= 2 ? rec.rounds[rec.rounds.size() - 2].hypergrad_err : kNaN;
    cell.wall_ms = rec.wall_ms;
    cell.iterate_bound_checked = rec.iterate_bound_checked;
    cell.iterate_bound_violations = rec.iterate_bound_violations;
  } catch (const std::exception& e) {
    cell.K = static_cast<int>(cell.N / cell.T);
    cell.gap_avg = cell.gap_last = cell.aligned_weight = cell.hypergrad_err_last = kNaN;
    cell.error = e.what();
  }
  return cell;
}

void prepare_checkpoint(const SweepPlan& plan) {
  if (plan.checkpoint_dir.empty()) return;
  fs::create_directories(plan.checkpoint_dir);
  const std::string hash = hash_hex(config_hash(sweep_plan_to_json(plan, false)));
  const fs::path marker = fs::path(plan.checkpoint_dir) / "plan.hash";
  if (fs::exists(marker)) {
    std::ifstream in(marker);
    std::string existing;
    in >> existing;
    if (existing != hash) {
      fail(ErrorCode::kConfig, "checkpoint directory " + plan.checkpoint_dir +
                                   " belongs to a different plan");
    }
  } else {
    write_file_atomic(marker.string(), hash + "\n");
  }
}

}  // namespace

int effective_replicates(const SweepPlan& plan) {
  if (plan.replicates > 0) return plan.replicates;
  return plan.algorithm == Algorithm::kAlg3Stochastic && plan.sigma > 0.0 ? 5 : 1;
}

std::vector<int> default_horizons(long long N, const SweepPlan& plan, const ProblemSpec& spec) {
  std::set<int> hs;
  for (long long t = 1; t <= N; t *= 2) hs.insert(static_cast<int>(t));
  if (plan.eta) {
    const int floor_t = min_theorem_horizon(*plan.eta, spec.mu);
    if (floor_t >= 1 && floor_t <= N) hs.insert(floor_t);
  }
  if (plan.algorithm == Algorithm::kAlg3Stochastic && N > 1) {
    const double n = static_cast<double>(N);
    const int root = static_cast<int>(std::ceil(std::sqrt(n * std::log(n))));
    if (root <= N) hs.insert(root);
  }
  return {hs.begin(), hs.end()};
}

std::uint64_t replicate_seed(const SweepPlan& plan, int replicate) {
  return hash_words(plan.seed, static_cast<std::uint64_t>(replicate), 0x73656564ull);
}

ProblemSpec plan_problem(const SweepPlan& plan) {
  return plan.problem ? *plan.problem : generate_problem(plan.kind, plan.params, plan.problem_seed);
}

int argmin_horizon(const std::vector<SweepCell>& cells, long long N, std::optional<int> replicate) {
  std::map<int, std::pair<double, int>> acc;  // T -> (sum, count)
  std::set<int> failed;
  for (const auto& c : cells) {
    if (c.N != N || (replicate && c.replicate != *replicate)) continue;
    if (!c.ok() || !std::isfinite(c.gap_avg)) {
      failed.insert(c.T);
      continue;
    }
    auto& a = acc[c.T];
    a.first += c.gap_avg;
    a.second += 1;
  }
  int best_t = 0;
  double best = INFINITY;
  for (const auto& [t, a] : acc) {  // ascending T, strict < keeps the smaller T on ties
    if (failed.count(t)) continue;
    const double mean = a.first / a.second;
    if (mean < best) {
      best = mean;
      best_t = t;
    }
  }
  return best_t;
}

SweepResult run_sweep(const SweepPlan& plan) {
  if (plan.budgets.empty()) fail(ErrorCode::kConfig, "sweep plan has no budgets");
  if (plan.jobs < 1) fail(ErrorCode::kConfig, "jobs must be >= 1");
  SweepResult result;
  result.spec = plan_problem(plan);
  if (plan.aligned_domain < 0 || plan.aligned_domain >= result.spec.num_domains()) {
    fail(ErrorCode::kConfig, "aligned_domain out of range");
  }
  result.oracle = outer_opt_oracle(result.spec);
  result.replicates = effective_replicates(plan);

  std::vector<SweepCell> cells;
  for (long long n : plan.budgets) {
    if (n < 1) fail(ErrorCode::kConfig, "budgets must be positive");
    const auto it = plan.horizons.find(n);
    std::vector<int> hs = it != plan.horizons.end() ? it->second : default_horizons(n, plan, result.spec);
    if (!std::is_sorted(hs.begin(), hs.end())) fail(ErrorCode::kConfig, "horizons must be sorted ascending");
    for (int t : hs) {
      if (t < 1 || t > n) fail(ErrorCode::kConfig, "horizon " + std::to_string(t) + " outside [1, N]");
      for (int r = 0; r < result.replicates; ++r) {
        SweepCell c;
        c.N = n;
        c.T = t;
        c.replicate = r;
        c.seed = replicate_seed(plan, r);
        cells.push_back(c);
      }
    }
  }

  prepare_checkpoint(plan);
  std::vector<char> done(cells.size(), 0);
  if (!plan.checkpoint_dir.empty()) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const fs::path p = cell_path(plan.checkpoint_dir, cells[i]);
      if (!fs::exists(p)) continue;
      std::ifstream in(p);
      cells[i] = cell_from_json(json::parse(in));
      done[i] = 1;
    }
  }

  std::atomic<std::size_t> next{0};
  const double f_star = result.oracle.F_star;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      if (done[i]) continue;
      cells[i] = run_cell(result.spec, plan, f_star, cells[i]);
      if (!plan.checkpoint_dir.empty()) {
        write_file_atomic(cell_path(plan.checkpoint_dir, cells[i]).string(), cell_to_json(cells[i]).dump());
      }
    }
  };
  const int workers = std::min<int>(plan.jobs, static_cast<int>(std::max<std::size_t>(cells.size(), 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  result.cells = std::move(cells);
  for (const auto& c : result.cells) result.failed_cells += c.ok() ? 0 : 1;
  for (long long n : plan.budgets) {
    result.argmin_T[n] = argmin_horizon(result.cells, n, std::nullopt);
    double sum = 0.0;
    for (int r = 0; r < result.replicates; ++r) sum += argmin_horizon(result.cells, n, r);
    result.mean_replicate_argmin_T[n] = sum / result.replicates;
  }
  return result;
}

}  // namespace mixlab
