#pragma once

// JSON documents for run configurations and sweep plans. Keys mirror the C++
// structs field for field; unknown keys are rejected.

#include <cstdint>
#include <optional>
#include <string>

#include "mixlab/losses.hpp"
#include "mixlab/mixers.hpp"
#include "mixlab/sweep.hpp"

namespace mixlab {

/// Where a problem comes from: a generator, a file, or an inline document.
/// JSON: {"kind": ..., "m", "d", "mu", "L", "spread", "operating_radius", "seed"}
///   or {"file": path} or {"inline": <problem document>}.
struct ProblemSource {
  ProblemKind kind = ProblemKind::kQuad1dPaper;
  GeneratorParams params;
  std::uint64_t seed = 0;
  std::optional<std::string> file;
  std::optional<ProblemSpec> inline_problem;
};

ProblemSource problem_source_from_json(const std::string& text);
std::string problem_source_to_json(const ProblemSource& source);
ProblemSpec resolve_problem(const ProblemSource& source);

/// Generator parameters without the kind/seed keys (used by the C API).
GeneratorParams generator_params_from_json(const std::string& text);

struct RunFile {
  std::optional<ProblemSource> problem;
  RunConfig config;
};

RunFile run_file_from_json(const std::string& text);
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);

SweepPlan sweep_plan_from_json(const std::string& text);
/// Runtime-only fields (jobs, checkpoint_dir) are omitted unless include_runtime
/// is set, so the hash of the result identifies the computation.
std::string sweep_plan_to_json(const SweepPlan& plan, bool include_runtime = true);

}  // namespace mixlab
