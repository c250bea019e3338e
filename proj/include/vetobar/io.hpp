#pragma once

// Result emission: CSV with a provenance comment line, JSON reports, and a
// small self-contained SVG line chart for convergence fans.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vetobar/skim.hpp"

namespace vetobar {

// FNV-1a, stable across runs and platforms; used for config provenance.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline constexpr const char* kToolVersion = "vetobar/0.1.0";

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& provenance) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    out_ << "# " << provenance << "\n";
    out_ << std::setprecision(17);
  }
  void header(const std::vector<std::string>& cols) {
    for (size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << "\n";
  }
  template <typename... Ts>
  void row(Ts... vals) {
    bool first = true;
    ((out_ << (first ? "" : ",") << vals, first = false), ...);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << "\n";
}

// Minimal line chart: one polyline per series over a shared x axis.
inline void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                            const std::vector<double>& xs,
                            const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  const int W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  double xlo = xs.front(), xhi = xs.back();
  double ylo = 1e300, yhi = -1e300;
  for (const auto& [name, ys] : series)
    for (double y : ys) {
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  if (yhi - ylo < 1e-12) {
    ylo -= 0.5;
    yhi += 0.5;
  }
  const double pad = 0.08 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;
  auto X = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * (W - ml - mr); };
  auto Y = [&](double y) { return H - mb - (y - ylo) / (yhi - ylo) * (H - mt - mb); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
  out << std::setprecision(6);
  for (size_t i = 0; i < xs.size(); ++i) {
    out << "<text x=\"" << X(xs[i]) << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << xs[i] << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double y = ylo + pad + (yhi - ylo - 2 * pad) * k / 4.0;
    out << "<text x=\"" << ml - 8 << "\" y=\"" << Y(y) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << y << "</text>\n";
  }
  int ci = 0;
  for (const auto& [name, ys] : series) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[ci % 4] << "\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i) out << X(xs[i]) << "," << Y(ys[i]) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << W - mr - 6 << "\" y=\"" << mt + 16 + 16 * ci
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << colors[ci % 4] << "\">" << name
        << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

inline void write_skim_solution_csv(const std::filesystem::path& path, const SkimSolution& sol,
                                    const std::string& provenance) {
  CsvWriter csv(path, provenance);
  csv.header({"v", "R", "P", "Pbar", "t"});
  for (size_t i = 0; i < sol.v.size(); ++i)
    csv.row(sol.v[i], sol.R[i], sol.P[i], sol.Pbar[i], sol.v[sol.t[i]]);
}

inline void write_skim_path_csv(const std::filesystem::path& path, const SkimSolution& sol,
                                const std::string& provenance) {
  CsvWriter csv(path, provenance);
  csv.header({"period", "state", "offer", "accept_lo", "accept_hi"});
  for (const auto& s : skim_path(sol))
    csv.row(s.period, sol.v[s.state], s.offer, s.accept_lo, s.accept_hi);
}

inline void write_sweep_csv(const std::filesystem::path& path,
                            const std::vector<SweepRow>& rows, const std::string& provenance) {
  CsvWriter csv(path, provenance);
  csv.header({"delta", "payoff", "benchmark", "gap"});
  for (const auto& r : rows) csv.row(r.delta, r.payoff, r.benchmark, r.gap);
}

}  // namespace vetobar
