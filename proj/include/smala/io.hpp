#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "smala/limits.hpp"
#include "smala/mala.hpp"

namespace smala {

// 17 significant digits round-trip doubles exactly.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path.string());
  }
  return out;
}

inline void write_trajectory_csv(const Trajectory& traj,
                                 const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "k,t,S,accepted,Q\n";
  for (long k = 0; k <= traj.steps(); ++k) {
    const std::size_t u = static_cast<std::size_t>(k);
    out << k << ',' << fmt_double(traj.time_of(k)) << ','
        << fmt_double(traj.S[u]) << ',' << int(traj.accepted[u]) << ','
        << fmt_double(traj.Q[u]) << '\n';
  }
}

inline void write_snapshots_csv(const Trajectory& traj,
                                const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "k,j,x_j\n";
  for (const auto& [k, x] : traj.snapshots) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      out << k << ',' << (j + 1) << ',' << fmt_double(x[j]) << '\n';
    }
  }
}

inline void write_ode_csv(const OdeSolution& sol,
                          const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "k,t,S\n";
  const auto& v = sol.grid_values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    out << k << ',' << fmt_double(double(k) * sol.step_size()) << ','
        << fmt_double(v[k]) << '\n';
  }
}

inline void write_sde_csv(const SdePath& path,
                          const std::filesystem::path& file) {
  std::ofstream out = open_output(file);
  out << "t,j,x_j,coefficient_S\n";
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    for (std::size_t j = 0; j < path.states[i].size(); ++j) {
      out << fmt_double(path.times[i]) << ',' << (j + 1) << ','
          << fmt_double(path.states[i][j]) << ','
          << fmt_double(path.coefficient_S[i]) << '\n';
    }
  }
}

/// Minimal static line plot: each series is a (x, y) polyline, axes linear
/// or log10 as requested by the caller (caller passes transformed data).
struct PlotSeries {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<double> x;
  std::vector<double> y;
};

inline void write_svg_plot(const std::vector<PlotSeries>& series,
                           const std::string& title,
                           const std::filesystem::path& path) {
  const double W = 640, H = 420, ml = 60, mr = 20, mt = 40, mb = 40;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  if (!(xmax > xmin)) { xmax = xmin + 1; }
  if (!(ymax > ymin)) { ymax = ymin + 1; }
  auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ofstream out = open_output(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
      << "' height='" << H << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << W / 2 << "' y='24' text-anchor='middle' "
         "font-family='sans-serif' font-size='15'>" << title << "</text>\n"
      << "<rect x='" << ml << "' y='" << mt << "' width='" << W - ml - mr
      << "' height='" << H - mt - mb
      << "' fill='none' stroke='#888'/>\n";
  int li = 0;
  for (const auto& s : series) {
    out << "<polyline fill='none' stroke='" << s.color
        << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    out << "'/>\n";
    out << "<text x='" << W - mr - 6 << "' y='" << mt + 16 + 16 * li
        << "' text-anchor='end' font-family='sans-serif' font-size='12' "
           "fill='" << s.color << "'>" << s.label << "</text>\n";
    ++li;
  }
  out << "<text x='" << ml - 8 << "' y='" << py(ymin)
      << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
      << fmt_double(ymin) << "</text>\n"
      << "<text x='" << ml - 8 << "' y='" << py(ymax) + 10
      << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
      << fmt_double(ymax) << "</text>\n"
      << "<text x='" << px(xmin) << "' y='" << H - mb + 16
      << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
      << fmt_double(xmin) << "</text>\n"
      << "<text x='" << px(xmax) << "' y='" << H - mb + 16
      << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
      << fmt_double(xmax) << "</text>\n"
      << "</svg>\n";
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace smala
