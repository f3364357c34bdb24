#include "mixlab/config_io.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace mixlab {

using nlohmann::json;

namespace {

json parse(const std::string& text, const char* what) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) fail(ErrorCode::kConfig, std::string(what) + " must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string(what) + ": " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* what) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(ErrorCode::kConfig, std::string(what) + ": unknown key '" + key + "'");
    }
  }
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string(what) + ": " + e.what());
  }
}

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorCode::kConfig, std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::optional<double> auto_or_number(const json& j, const char* what) {
  if (j.is_string()) {
    if (j.get<std::string>() != "auto-theorem") {
      fail(ErrorCode::kConfig, std::string(what) + " must be a number or \"auto-theorem\"");
    }
    return std::nullopt;
  }
  return j.get<double>();
}

json auto_or_number_json(const std::optional<double>& v) { return v ? json(*v) : json("auto-theorem"); }

void read_params(const json& j, GeneratorParams& p) {
  if (j.contains("m")) p.m = j["m"].get<int>();
  if (j.contains("d")) p.d = j["d"].get<int>();
  if (j.contains("mu")) p.mu = j["mu"].get<double>();
  if (j.contains("L")) p.L = j["L"].get<double>();
  if (j.contains("spread")) p.spread = j["spread"].get<double>();
  if (j.contains("operating_radius")) p.operating_radius = j["operating_radius"].get<double>();
}

ProblemSource source_from(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kConfig, "problem must be an object");
  ProblemSource s;
  if (j.contains("file")) {
    reject_unknown(j, {"file"}, "problem");
    s.file = j["file"].get<std::string>();
    return s;
  }
  if (j.contains("inline")) {
    reject_unknown(j, {"inline"}, "problem");
    s.inline_problem = problem_from_json(j["inline"].dump());
    return s;
  }
  reject_unknown(j, {"kind", "m", "d", "mu", "L", "spread", "operating_radius", "seed"}, "problem");
  s.kind = parse_problem_kind(j.at("kind").get<std::string>());
  read_params(j, s.params);
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  return s;
}

json source_json(const ProblemSource& s) {
  if (s.file) return {{"file", *s.file}};
  if (s.inline_problem) return {{"inline", json::parse(problem_to_json(*s.inline_problem))}};
  return {{"kind", problem_kind_name(s.kind)},
          {"m", s.params.m},
          {"d", s.params.d},
          {"mu", s.params.mu},
          {"L", s.params.L},
          {"spread", s.params.spread},
          {"operating_radius", s.params.operating_radius},
          {"seed", s.seed}};
}

constexpr std::initializer_list<const char*> kRunKeys = {
    "algorithm", "eta",  "alpha", "T",    "K",             "N",            "theta0", "w0",
    "approx_mode", "gamma", "sigma", "seed", "strict_regime", "record_timing", "f_star"};

RunConfig run_config_from(const json& j) {
  RunConfig c;
  if (j.contains("algorithm")) c.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
  if (j.contains("eta")) c.eta = auto_or_number(j["eta"], "eta");
  if (j.contains("alpha")) c.alpha = auto_or_number(j["alpha"], "alpha");
  if (j.contains("T")) c.T = j["T"].get<int>();
  if (j.contains("K")) c.K = j["K"].get<int>();
  if (j.contains("N")) c.N = j["N"].get<long long>();
  if (j.contains("theta0")) c.theta0 = vector_from(j["theta0"], "theta0");
  if (j.contains("w0")) {
    if (j["w0"].is_string()) {
      if (j["w0"].get<std::string>() != "uniform") fail(ErrorCode::kConfig, "w0 must be an array or \"uniform\"");
    } else {
      c.w0 = vector_from(j["w0"], "w0");
    }
  }
  if (j.contains("approx_mode")) c.approx_mode = parse_approx_mode(j["approx_mode"].get<std::string>());
  if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
  if (j.contains("sigma")) c.sigma = j["sigma"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("strict_regime")) c.strict_regime = j["strict_regime"].get<bool>();
  if (j.contains("record_timing")) c.record_timing = j["record_timing"].get<bool>();
  if (j.contains("f_star")) c.f_star = j["f_star"].get<double>();
  if (c.algorithm == Algorithm::kAlg3Stochastic && !j.contains("seed")) {
    fail(ErrorCode::kConfig, "alg3-stochastic requires an explicit seed");
  }
  return c;
}

}  // namespace

ProblemSource problem_source_from_json(const std::string& text) {
  const json j = parse(text, "problem source");
  return guarded("problem source", [&] { return source_from(j); });
}

std::string problem_source_to_json(const ProblemSource& source) { return source_json(source).dump(2); }

ProblemSpec resolve_problem(const ProblemSource& source) {
  if (source.file) return load_problem(*source.file);
  if (source.inline_problem) return *source.inline_problem;
  return generate_problem(source.kind, source.params, source.seed);
}

GeneratorParams generator_params_from_json(const std::string& text) {
  const json j = text.empty() ? json::object() : parse(text, "generator params");
  return guarded("generator params", [&] {
    reject_unknown(j, {"m", "d", "mu", "L", "spread", "operating_radius"}, "generator params");
    GeneratorParams p;
    read_params(j, p);
    return p;
  });
}

RunFile run_file_from_json(const std::string& text) {
  const json j = parse(text, "run config");
  return guarded("run config", [&] {
    for (const auto& [key, _] : j.items()) {
      if (key != "problem" && std::find_if(kRunKeys.begin(), kRunKeys.end(),
                                           [&](const char* k) { return key == k; }) == kRunKeys.end()) {
        fail(ErrorCode::kConfig, "run config: unknown key '" + key + "'");
      }
    }
    RunFile f;
    if (j.contains("problem")) f.problem = source_from(j["problem"]);
    f.config = run_config_from(j);
    return f;
  });
}

RunConfig run_config_from_json(const std::string& text) {
  RunFile f = run_file_from_json(text);
  if (f.problem) fail(ErrorCode::kConfig, "run config: 'problem' is not accepted here");
  return f.config;
}

std::string run_config_to_json(const RunConfig& c) {
  json j = {{"algorithm", algorithm_name(c.algorithm)},
            {"eta", auto_or_number_json(c.eta)},
            {"alpha", auto_or_number_json(c.alpha)},
            {"T", c.T},
            {"K", c.K},
            {"N", c.N},
            {"w0", c.w0 ? vector_json(*c.w0) : json("uniform")},
            {"approx_mode", approx_mode_name(c.approx_mode)},
            {"sigma", c.sigma},
            {"seed", c.seed},
            {"strict_regime", c.strict_regime},
            {"record_timing", c.record_timing}};
  if (c.theta0) j["theta0"] = vector_json(*c.theta0);
  if (c.gamma) j["gamma"] = *c.gamma;
  if (c.f_star) j["f_star"] = *c.f_star;
  return j.dump(2);
}

SweepPlan sweep_plan_from_json(const std::string& text) {
  const json j = parse(text, "sweep plan");
  return guarded("sweep plan", [&] {
    reject_unknown(j,
                   {"problem", "budgets", "horizons", "algorithm", "eta", "alpha", "approx_mode", "gamma",
                    "sigma", "theta0", "replicates", "seed", "aligned_domain", "jobs", "checkpoint_dir",
                    "record_timing"},
                   "sweep plan");
    SweepPlan p;
    const ProblemSource src = source_from(j.at("problem"));
    if (src.file || src.inline_problem) {
      p.problem = resolve_problem(src);
    } else {
      p.kind = src.kind;
      p.params = src.params;
      p.problem_seed = src.seed;
    }
    p.budgets = j.at("budgets").get<std::vector<long long>>();
    if (j.contains("horizons")) {
      const json& h = j["horizons"];
      if (h.is_array()) {
        const auto hs = h.get<std::vector<int>>();
        for (long long n : p.budgets) {
          std::vector<int> within;
          for (int t : hs) {
            if (t <= n) within.push_back(t);
          }
          p.horizons[n] = within;
        }
      } else if (h.is_object()) {
        for (const auto& [key, value] : h.items()) p.horizons[std::stoll(key)] = value.get<std::vector<int>>();
      } else {
        fail(ErrorCode::kConfig, "horizons must be an array or an object keyed by N");
      }
    }
    if (j.contains("algorithm")) p.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
    if (j.contains("eta")) p.eta = auto_or_number(j["eta"], "eta");
    if (j.contains("alpha")) p.alpha = auto_or_number(j["alpha"], "alpha");
    if (j.contains("approx_mode")) p.approx_mode = parse_approx_mode(j["approx_mode"].get<std::string>());
    if (j.contains("gamma")) p.gamma = j["gamma"].get<double>();
    if (j.contains("sigma")) p.sigma = j["sigma"].get<double>();
    if (j.contains("theta0")) p.theta0 = vector_from(j["theta0"], "theta0");
    if (j.contains("replicates")) p.replicates = j["replicates"].get<int>();
    if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("aligned_domain")) p.aligned_domain = j["aligned_domain"].get<int>();
    if (j.contains("jobs")) p.jobs = j["jobs"].get<int>();
    if (j.contains("checkpoint_dir")) p.checkpoint_dir = j["checkpoint_dir"].get<std::string>();
    if (j.contains("record_timing")) p.record_timing = j["record_timing"].get<bool>();
    if (p.replicates < 0) fail(ErrorCode::kConfig, "replicates must be >= 0");
    return p;
  });
}

std::string sweep_plan_to_json(const SweepPlan& p, bool include_runtime) {
  ProblemSource src;
  if (p.problem) {
    src.inline_problem = *p.problem;
  } else {
    src.kind = p.kind;
    src.params = p.params;
    src.seed = p.problem_seed;
  }
  json horizons = json::object();
  for (const auto& [n, hs] : p.horizons) horizons[std::to_string(n)] = hs;
  json j = {{"problem", source_json(src)},
            {"budgets", p.budgets},
            {"horizons", horizons},
            {"algorithm", algorithm_name(p.algorithm)},
            {"eta", auto_or_number_json(p.eta)},
            {"alpha", auto_or_number_json(p.alpha)},
            {"approx_mode", approx_mode_name(p.approx_mode)},
            {"sigma", p.sigma},
            {"replicates", p.replicates},
            {"seed", p.seed},
            {"aligned_domain", p.aligned_domain},
            {"record_timing", p.record_timing}};
  if (p.gamma) j["gamma"] = *p.gamma;
  if (p.theta0) j["theta0"] = vector_json(*p.theta0);
  if (include_runtime) {
    j["jobs"] = p.jobs;
    j["checkpoint_dir"] = p.checkpoint_dir;
  }
  return j.dump(2);
}

}  // namespace mixlab
