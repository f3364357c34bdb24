#include "mixlab/mixlab.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "mixlab/config_io.hpp"
#include "mixlab/emit.hpp"
#include "mixlab/fit.hpp"
#include "mixlab/hypergrad.hpp"
#include "mixlab/mixers.hpp"
#include "mixlab/oracle.hpp"
#include "mixlab/quad_example.hpp"
#include "mixlab/sweep.hpp"

struct mixlab_problem {
  mixlab::ProblemSpec spec;
};

struct mixlab_run {
  mixlab::RunRecord record;
};

struct mixlab_sweep {
  mixlab::SweepPlan plan;
  mixlab::SweepResult result;
};

struct mixlab_quad {
  mixlab::QuadTrace trace;
  mixlab::QuadReport report;
};

namespace {

thread_local std::string g_last_error;

mixlab_status to_status(mixlab::ErrorCode code) { return static_cast<mixlab_status>(static_cast<int>(code)); }

template <class F>
mixlab_status guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return MIXLAB_OK;
  } catch (const mixlab::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MIXLAB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return MIXLAB_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mixlab::MixtureWeights weights_from(const double* w, int m, const mixlab::ProblemSpec& spec) {
  mixlab::check_same_size(m, spec.num_domains(), "weights");
  return mixlab::MixtureWeights::from_values(Eigen::Map<const mixlab::Vector>(w, m));
}

void copy_out(const mixlab::Vector& v, double* out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i);
}

}  // namespace

extern "C" {

const char* mixlab_version(void) { return mixlab::kVersion; }

const char* mixlab_last_error(void) { return g_last_error.c_str(); }

const char* mixlab_status_name(mixlab_status status) {
  if (status == MIXLAB_OK) return "ok";
  if (status == MIXLAB_ERR_NULL_ARGUMENT) return "null argument";
  if (status == MIXLAB_ERR_INTERNAL) return "internal error";
  if (status >= MIXLAB_ERR_SHAPE && status <= MIXLAB_ERR_DEGENERATE_FIT) {
    return mixlab::error_code_name(static_cast<mixlab::ErrorCode>(status));
  }
  return "unknown status";
}

void mixlab_string_free(char* s) { std::free(s); }

mixlab_status mixlab_problem_generate(const char* kind, const char* params_json, uint64_t seed,
                                      mixlab_problem** out) {
  if (!kind || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    const auto params = mixlab::generator_params_from_json(params_json ? params_json : "");
    *out = new mixlab_problem{mixlab::generate_problem(mixlab::parse_problem_kind(kind), params, seed)};
  });
}

mixlab_status mixlab_problem_from_json(const char* json, mixlab_problem** out) {
  if (!json || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    const auto doc = nlohmann::json::parse(json, nullptr, false);
    if (doc.is_object() && (doc.contains("kind") || doc.contains("file") || doc.contains("inline"))) {
      *out = new mixlab_problem{mixlab::resolve_problem(mixlab::problem_source_from_json(json))};
    } else {
      *out = new mixlab_problem{mixlab::problem_from_json(json)};
    }
  });
}

mixlab_status mixlab_problem_load(const char* path, mixlab_problem** out) {
  if (!path || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] { *out = new mixlab_problem{mixlab::load_problem(path)}; });
}

mixlab_status mixlab_problem_to_json(const mixlab_problem* problem, char** out_json) {
  if (!problem || !out_json) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] { *out_json = dup_string(mixlab::problem_to_json(problem->spec)); });
}

mixlab_status mixlab_problem_dims(const mixlab_problem* problem, int* num_domains, int* dim) {
  if (!problem) return MIXLAB_ERR_NULL_ARGUMENT;
  if (num_domains) *num_domains = problem->spec.num_domains();
  if (dim) *dim = problem->spec.dim();
  return MIXLAB_OK;
}

void mixlab_problem_free(mixlab_problem* problem) { delete problem; }

mixlab_status mixlab_outer_objective(const mixlab_problem* problem, const double* w, int m, double* out) {
  if (!problem || !w || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] { *out = mixlab::outer_objective(problem->spec, weights_from(w, m, problem->spec)); });
}

mixlab_status mixlab_exact_hypergrad(const mixlab_problem* problem, const double* w, int m, double* g_out) {
  if (!problem || !w || !g_out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    copy_out(mixlab::exact_hypergrad(problem->spec, weights_from(w, m, problem->spec)).g, g_out);
  });
}

mixlab_status mixlab_finite_diff_hypergrad(const mixlab_problem* problem, const double* w, int m, double h,
                                           double* g_out) {
  if (!problem || !w || !g_out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    copy_out(mixlab::finite_diff_hypergrad(problem->spec, weights_from(w, m, problem->spec), h).g, g_out);
  });
}

mixlab_status mixlab_outer_oracle(const mixlab_problem* problem, double* w_star_out, int m, double* f_star_out) {
  if (!problem || !f_star_out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    const auto res = mixlab::outer_opt_oracle(problem->spec);
    if (w_star_out) {
      mixlab::check_same_size(m, problem->spec.num_domains(), "w_star");
      copy_out(res.w_star.values(), w_star_out);
    }
    *f_star_out = res.F_star;
  });
}

mixlab_status mixlab_run_create(const mixlab_problem* problem, const char* config_json, int with_oracle,
                                mixlab_run** out) {
  if (!problem || !config_json || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    mixlab::RunConfig cfg = mixlab::run_config_from_json(config_json);
    if (with_oracle && !cfg.f_star) cfg.f_star = mixlab::outer_opt_oracle(problem->spec).F_star;
    *out = new mixlab_run{mixlab::run(problem->spec, cfg)};
  });
}

mixlab_status mixlab_run_summary(const mixlab_run* run, int* rounds, double* gap_avg, double* gap_final,
                                 int* iterate_bound_violations) {
  if (!run) return MIXLAB_ERR_NULL_ARGUMENT;
  if (rounds) *rounds = run->record.K;
  if (gap_avg) *gap_avg = run->record.gap_avg;
  if (gap_final) *gap_final = run->record.gap_final;
  if (iterate_bound_violations) *iterate_bound_violations = run->record.iterate_bound_violations;
  return MIXLAB_OK;
}

mixlab_status mixlab_run_final_weights(const mixlab_run* run, double* w_out, int m) {
  if (!run || !w_out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    mixlab::check_same_size(m, run->record.w_final.size(), "final weights");
    copy_out(run->record.w_final.values(), w_out);
  });
}

mixlab_status mixlab_run_csv(const mixlab_run* run, char** out) {
  if (!run || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] { *out = dup_string(mixlab::run_record_csv(run->record)); });
}

mixlab_status mixlab_run_json(const mixlab_run* run, char** out) {
  if (!run || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] { *out = dup_string(mixlab::run_record_json(run->record)); });
}

void mixlab_run_free(mixlab_run* run) { delete run; }

mixlab_status mixlab_sweep_run(const char* plan_json, int jobs, mixlab_sweep** out) {
  if (!plan_json || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    mixlab::SweepPlan plan = mixlab::sweep_plan_from_json(plan_json);
    if (jobs > 0) plan.jobs = jobs;
    auto* sweep = new mixlab_sweep{plan, {}};
    try {
      sweep->result = mixlab::run_sweep(sweep->plan);
    } catch (...) {
      delete sweep;
      throw;
    }
    *out = sweep;
  });
}

mixlab_status mixlab_sweep_argmin(const mixlab_sweep* sweep, long long budget, double* mean_argmin_T) {
  if (!sweep || !mean_argmin_T) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    const auto it = sweep->result.mean_replicate_argmin_T.find(budget);
    if (it == sweep->result.mean_replicate_argmin_T.end()) {
      throw mixlab::Error(mixlab::ErrorCode::kConfig, "budget " + std::to_string(budget) + " not in sweep");
    }
    *mean_argmin_T = it->second;
  });
}

mixlab_status mixlab_sweep_fit(const mixlab_sweep* sweep, const char* law, char** report_json) {
  if (!sweep || !law || !report_json) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    const auto fit = mixlab::fit_scaling(sweep->result, mixlab::parse_scaling_law(law));
    *report_json = dup_string(mixlab::scaling_fit_json(fit));
  });
}

mixlab_status mixlab_sweep_csv(const mixlab_sweep* sweep, char** out) {
  if (!sweep || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] { *out = dup_string(mixlab::sweep_csv(sweep->result)); });
}

mixlab_status mixlab_sweep_json(const mixlab_sweep* sweep, char** out) {
  if (!sweep || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] { *out = dup_string(mixlab::sweep_json(sweep->result)); });
}

mixlab_status mixlab_sweep_write(const mixlab_sweep* sweep, const char* out_dir, const char* format) {
  if (!sweep || !out_dir || !format) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    namespace fs = std::filesystem;
    const std::string fmt(format);
    if (fmt != "csv" && fmt != "json") throw mixlab::Error(mixlab::ErrorCode::kConfig, "format must be csv or json");
    const fs::path dir(out_dir);
    std::vector<std::string> files;
    const std::string table = fmt == "csv" ? "sweep.csv" : "sweep.json";
    mixlab::write_file_atomic((dir / table).string(), fmt == "csv" ? mixlab::sweep_csv(sweep->result)
                                                                 : mixlab::sweep_json(sweep->result));
    files.push_back(table);
    for (const auto& [name, svg] : mixlab::sweep_plots(sweep->result)) {
      mixlab::write_file_atomic((dir / name).string(), svg);
      files.push_back(name);
    }
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < sweep->result.replicates; ++r) seeds.push_back(mixlab::replicate_seed(sweep->plan, r));
    mixlab::write_file_atomic((dir / "manifest.json").string(),
                              mixlab::manifest_json("sweep", mixlab::sweep_plan_to_json(sweep->plan, false), seeds,
                                                    files));
  });
}

void mixlab_sweep_free(mixlab_sweep* sweep) { delete sweep; }

mixlab_status mixlab_quad_simulate(double R, double eta, double alpha, int T, long long N, double c,
                                   mixlab_quad** out) {
  if (!out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    auto* q = new mixlab_quad{mixlab::simulate(R, eta, alpha, T, N), {}};
    try {
      q->report = mixlab::theorem_predicates(q->trace, c);
    } catch (...) {
      delete q;
      throw;
    }
    *out = q;
  });
}

mixlab_status mixlab_quad_trace_csv(const mixlab_quad* quad, char** out) {
  if (!quad || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] { *out = dup_string(mixlab::quad_trace_csv(quad->trace)); });
}

mixlab_status mixlab_quad_report_json(const mixlab_quad* quad, char** out) {
  if (!quad || !out) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] { *out = dup_string(mixlab::quad_report_json(quad->report)); });
}

mixlab_status mixlab_quad_predicates(const mixlab_quad* quad, int* greedy_holds, int* recovery_holds) {
  if (!quad) return MIXLAB_ERR_NULL_ARGUMENT;
  if (greedy_holds) *greedy_holds = quad->report.greedy_holds ? 1 : 0;
  if (recovery_holds) *recovery_holds = quad->report.recovery_holds ? 1 : 0;
  return MIXLAB_OK;
}

void mixlab_quad_free(mixlab_quad* quad) { delete quad; }

int mixlab_quad_recovery_horizon(double R, double eta, double c) { return mixlab::recovery_horizon(R, eta, c); }

mixlab_status mixlab_gradcheck(const char* problem_json, int trials, double tolerance, uint64_t seed,
                               char** report_json, int* failures) {
  if (!problem_json) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    const auto src = mixlab::problem_source_from_json(problem_json);
    if (src.file || src.inline_problem) {
      throw mixlab::Error(mixlab::ErrorCode::kConfig, "gradcheck needs a generator source");
    }
    const auto rep = mixlab::gradcheck(src.kind, src.params, seed, trials, tolerance);
    if (failures) *failures = rep.failures;
    if (report_json) {
      nlohmann::json doc = {{"trials", rep.trials},
                            {"failures", rep.failures},
                            {"tolerance", rep.tolerance},
                            {"worst_relative", rep.worst_relative}};
      *report_json = dup_string(doc.dump(2));
    }
  });
}

mixlab_status mixlab_decay(const mixlab_problem* problem, const char* config_json, char** report_json, char** csv) {
  if (!problem || !config_json) return MIXLAB_ERR_NULL_ARGUMENT;
  return guard([&] {
    using nlohmann::json;
    const auto& spec = problem->spec;
    json cfg;
    try {
      cfg = json::parse(config_json);
      for (const auto& [key, _] : cfg.items()) {
        if (key != "eta" && key != "horizons" && key != "theta0" && key != "w" && key != "approx_mode" &&
            key != "gamma") {
          throw mixlab::Error(mixlab::ErrorCode::kConfig, "decay config: unknown key '" + key + "'");
        }
      }
      const double eta = cfg.at("eta").get<double>();
      const auto horizons = cfg.at("horizons").get<std::vector<int>>();
      mixlab::Vector theta0 = mixlab::Vector::Zero(spec.dim());
      if (cfg.contains("theta0")) {
        const auto v = cfg["theta0"].get<std::vector<double>>();
        theta0 = Eigen::Map<const mixlab::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
      }
      mixlab::MixtureWeights w = mixlab::MixtureWeights::uniform(spec.num_domains());
      if (cfg.contains("w")) {
        const auto v = cfg["w"].get<std::vector<double>>();
        w = weights_from(v.data(), static_cast<int>(v.size()), spec);
      }
      const auto mode = mixlab::parse_approx_mode(cfg.value("approx_mode", std::string("exact-at-optimum")));
      std::optional<double> gamma;
      if (cfg.contains("gamma")) gamma = cfg["gamma"].get<double>();
      const auto approx = mixlab::make_approximator(mode, spec, gamma);
      const auto rep = mixlab::fit_decay(spec, w, theta0, eta, horizons, approx);
      if (report_json) *report_json = dup_string(mixlab::decay_json(rep));
      if (csv) *csv = dup_string(mixlab::decay_csv(rep));
    } catch (const json::exception& e) {
      throw mixlab::Error(mixlab::ErrorCode::kConfig, std::string("decay config: ") + e.what());
    }
  });
}

}  // extern "C"
