#include "mixlab/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mixlab/format.hpp"

namespace mixlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) fail(ErrorCode::kIo, "cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t config_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  for (const auto& c : result.cells) {
    out << c.N << ',' << c.T << ',' << c.seed << ',' << c.K << ',' << fmt_num(c.gap_avg) << ','
        << fmt_num(c.gap_last) << ',' << fmt_num(c.aligned_weight) << ','
        << fmt_num(c.hypergrad_err_last) << ',' << fmt_num(c.wall_ms) << '\n';
  }
  return out.str();
}

std::vector<SweepCell> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSweepCsvHeader) fail(ErrorCode::kIo, "unexpected sweep CSV header");
  std::vector<SweepCell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) fail(ErrorCode::kIo, "sweep CSV row has " + std::to_string(f.size()) + " fields");
    SweepCell c;
    c.N = std::stoll(f[0]);
    c.T = std::stoi(f[1]);
    c.seed = std::stoull(f[2]);
    c.K = std::stoi(f[3]);
    c.gap_avg = parse_num(f[4]);
    c.gap_last = parse_num(f[5]);
    c.aligned_weight = parse_num(f[6]);
    c.hypergrad_err_last = parse_num(f[7]);
    c.wall_ms = parse_num(f[8]);
    cells.push_back(c);
  }
  return cells;
}

std::string sweep_json(const SweepResult& result) {
  json cells = json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"N", c.N},
                     {"T", c.T},
                     {"replicate", c.replicate},
                     {"seed", c.seed},
                     {"K", c.K},
                     {"final_gap_avg_iterate", num(c.gap_avg)},
                     {"final_gap_last_iterate", num(c.gap_last)},
                     {"aligned_weight", num(c.aligned_weight)},
                     {"hypergrad_err_last", num(c.hypergrad_err_last)},
                     {"wall_ms", c.wall_ms},
                     {"iterate_bound_checked", c.iterate_bound_checked},
                     {"iterate_bound_violations", c.iterate_bound_violations},
                     {"error", c.error}});
  }
  json argmin = json::object();
  for (const auto& [n, t] : result.argmin_T) argmin[std::to_string(n)] = t;
  json mean_argmin = json::object();
  for (const auto& [n, t] : result.mean_replicate_argmin_T) mean_argmin[std::to_string(n)] = t;
  const Vector& ws = result.oracle.w_star.values();
  json doc = {{"F_star", num(result.oracle.F_star)},
              {"w_star", std::vector<double>(ws.data(), ws.data() + ws.size())},
              {"oracle_grid_F", num(result.oracle.grid_F)},
              {"oracle_projected_F", num(result.oracle.projected_F)},
              {"replicates", result.replicates},
              {"failed_cells", result.failed_cells},
              {"argmin_T", argmin},
              {"mean_replicate_argmin_T", mean_argmin},
              {"cells", cells}};
  return doc.dump(2);
}

std::string svg_plot(const PlotSpec& plot) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 55;
  auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(tx(x)) && std::isfinite(ty(y)) && (!plot.log_x || x > 0) && (!plot.log_y || y > 0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return kTop + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
      << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
      << xml_escape(plot.title) << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double v, bool log) {
    return log ? "1e" + fmt_num(std::round(v * 100) / 100) : fmt_num(std::round(v * 1000) / 1000);
  };
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double gx = kLeft + pw * i / 4.0;
    const double gy = kTop + ph - ph * i / 4.0;
    out << "<text x=\"" << gx << "\" y=\"" << kTop + ph + 18
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << label(fx, plot.log_x)
        << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << gy + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << label(fy, plot.log_y)
        << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 12
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << xml_escape(plot.x_label)
      << "</text>\n"
      << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" font-family=\"sans-serif\" font-size=\"13\" "
      << "text-anchor=\"middle\" transform=\"rotate(-90 16 " << kTop + ph / 2 << ")\">"
      << xml_escape(plot.y_label) << "</text>\n";
  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const auto& series = plot.series[s];
    const char* colour = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::ostringstream pts;
    for (std::size_t i = 0; i < series.x.size() && i < series.y.size(); ++i) {
      if (!usable(series.x[i], series.y[i])) continue;
      pts << px(series.x[i]) << ',' << py(series.y[i]) << ' ';
    }
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"" << pts.str()
        << "\"/>\n";
    const double ly = kTop + 16 + 18.0 * s;
    out << "<line x1=\"" << kW - kRight + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kW - kRight + 32
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kW - kRight + 38 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(series.name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::map<std::string, std::string> sweep_plots(const SweepResult& result) {
  PlotSpec loss{"Final suboptimality vs horizon", "T", "F(w_avg) - F*", true, true, {}};
  PlotSpec weight{"Aligned-domain weight vs horizon", "T", "final aligned weight", true, false, {}};
  std::map<long long, std::map<int, std::pair<double, double>>> gap_sum;
  std::map<long long, std::map<int, std::pair<double, double>>> weight_sum;
  for (const auto& c : result.cells) {
    if (!c.ok()) continue;
    auto& g = gap_sum[c.N][c.T];
    g.first += c.gap_avg;
    g.second += 1;
    auto& w = weight_sum[c.N][c.T];
    w.first += c.aligned_weight;
    w.second += 1;
  }
  for (const auto& [n, by_t] : gap_sum) {
    PlotSeries ls{"N=" + std::to_string(n), {}, {}};
    PlotSeries ws{"N=" + std::to_string(n), {}, {}};
    for (const auto& [t, acc] : by_t) {
      ls.x.push_back(t);
      ls.y.push_back(std::max(acc.first / acc.second, 1e-300));
      const auto& wa = weight_sum[n][t];
      ws.x.push_back(t);
      ws.y.push_back(wa.first / wa.second);
    }
    loss.series.push_back(std::move(ls));
    weight.series.push_back(std::move(ws));
  }
  return {{"loss_vs_T.svg", svg_plot(loss)}, {"aligned_weight_vs_T.svg", svg_plot(weight)}};
}

std::string manifest_json(const std::string& command, const std::string& config_json,
                          const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& files) {
  json doc = {{"command", command},
              {"config_hash", hash_hex(config_hash(config_json))},
              {"config", json::parse(config_json)},
              {"seeds", seeds},
              {"files", files},
              {"versions",
               {{"mixlab", kVersion},
                {"compiler", __VERSION__},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                              "." + std::to_string(EIGEN_MINOR_VERSION)}}}};
  return doc.dump(2);
}

std::string quad_trace_csv(const QuadTrace& trace) {
  std::ostringstream out;
  out << "k,theta,w,phi,gbar\n";
  for (std::size_t k = 0; k < trace.theta.size(); ++k) {
    out << k << ',' << fmt_num(trace.theta[k]) << ',' << fmt_num(trace.w[k]) << ',' << fmt_num(trace.phi[k])
        << ',' << (k < trace.gbar.size() ? fmt_num(trace.gbar[k]) : std::string("nan")) << '\n';
  }
  return out.str();
}

std::string quad_report_json(const QuadReport& r) {
  json doc = {{"R_bar", r.R_bar},
              {"phi_final", r.phi_final},
              {"w_final", r.w_final},
              {"greedy",
               {{"applicable", r.greedy_applicable},
                {"phi_bound", r.greedy_phi_bound},
                {"margin", r.greedy_margin},
                {"holds", r.greedy_holds}}},
              {"recovery",
               {{"c", r.c},
                {"T", r.recovery_T},
                {"applicable", r.recovery_applicable},
                {"beta", r.beta},
                {"w_bound", r.recovery_w_bound},
                {"margin", r.recovery_margin},
                {"holds", r.recovery_holds}}}};
  return doc.dump(2);
}

std::string decay_csv(const DecayReport& report) {
  std::ostringstream out;
  out << "T,error\n";
  for (std::size_t i = 0; i < report.horizons.size(); ++i) {
    out << report.horizons[i] << ',' << fmt_num(report.errors[i]) << '\n';
  }
  return out.str();
}

std::string decay_json(const DecayReport& r) {
  std::vector<json> errors;
  for (double e : r.errors) errors.push_back(num(e));
  json doc = {{"eta", r.eta},
              {"mu", r.mu},
              {"slope", r.slope},
              {"intercept", r.intercept},
              {"target_slope", r.target_slope},
              {"relative_deviation", num(r.relative_deviation)},
              {"floor", num(r.floor)},
              {"fit_begin", r.fit_begin},
              {"fit_end", r.fit_end},
              {"horizons", r.horizons},
              {"errors", errors}};
  return doc.dump(2);
}

std::string scaling_fit_json(const ScalingFit& fit) {
  std::vector<json> residuals;
  for (double x : fit.residuals) residuals.push_back(num(x));
  json doc = {{"law", scaling_law_name(fit.law)},
              {"coef", num(fit.coef)},
              {"r2", num(fit.r2)},
              {"competing_r2", num(fit.competing_r2)},
              {"degenerate", fit.degenerate},
              {"residuals", residuals}};
  return doc.dump(2);
}

}  // namespace mixlab
