#pragma once

// Output writers: CSV and JSON tables, SVG line plots and the run manifest.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mixlab/fit.hpp"
#include "mixlab/quad_example.hpp"
#include "mixlab/sweep.hpp"

namespace mixlab {

inline constexpr const char* kVersion = "0.1.0";

/// Writes to a sibling temporary file and renames it over path.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t config_hash(const std::string& canonical);
std::string hash_hex(std::uint64_t h);

inline constexpr const char* kSweepCsvHeader =
    "N,T,seed,K,final_gap_avg_iterate,final_gap_last_iterate,aligned_weight,hypergrad_err_last,wall_ms";

std::string sweep_csv(const SweepResult& result);
/// Parses the columns of kSweepCsvHeader back into cells (replicate and error are not stored).
std::vector<SweepCell> parse_sweep_csv(const std::string& text);
std::string sweep_json(const SweepResult& result);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

std::string svg_plot(const PlotSpec& plot);

/// "loss_vs_T.svg" (replicate-mean gap of the averaged iterate) and
/// "aligned_weight_vs_T.svg", one series per budget N.
std::map<std::string, std::string> sweep_plots(const SweepResult& result);

std::string manifest_json(const std::string& command, const std::string& config_json,
                          const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& files);

std::string quad_trace_csv(const QuadTrace& trace);
std::string quad_report_json(const QuadReport& report);
std::string decay_csv(const DecayReport& report);
std::string decay_json(const DecayReport& report);
std::string scaling_fit_json(const ScalingFit& fit);

}  // namespace mixlab
