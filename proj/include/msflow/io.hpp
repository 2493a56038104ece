// Serialization: snapshot CSVs with 17-significant-digit decimals (bit-exact
// round trip), diagnostic series CSVs, and JSON manifests with a content hash.
#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msflow/diagnostics.hpp"
#include "msflow/epdiff.hpp"

namespace msflow::io {

using epdiff::ChState;
using grid::GridSpec;

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Snapshot CSV: header `x,u,l,pi,W[,rho]`, one row per node, labels written as
// absolute values l = x + dl.
inline void write_state_csv(const std::filesystem::path& path, const ChState<double>& s,
                            const GridSpec& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "x,u,l,pi,W" << (s.has_rho() ? ",rho" : "") << "\n";
  const auto x = g.nodes<double>();
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    out << format_double(x[j]) << ',' << format_double(s.u[j]) << ','
        << format_double(x[j] + s.dl[j]) << ',' << format_double(s.pi[j]) << ','
        << format_double(s.W[j]);
    if (s.has_rho()) out << ',' << format_double(s.rho[j]);
    out << "\n";
  }
}

inline ChState<double> read_state_csv(const std::filesystem::path& path, const GridSpec& g,
                                      double time) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path.string());
  std::string header;
  std::getline(in, header);
  const bool with_rho = header.find("rho") != std::string::npos;
  const int n = g.n_cells;
  ChState<double> s;
  s.u.resize(n);
  s.dl.resize(n);
  s.pi.resize(n);
  s.W.resize(n);
  if (with_rho) s.rho.resize(n);
  s.time = time;
  const auto x = g.nodes<double>();
  std::string line;
  for (int j = 0; j < n; ++j) {
    if (!std::getline(in, line))
      throw std::runtime_error("snapshot truncated: " + path.string());
    std::istringstream row(line);
    std::string cell;
    auto next = [&]() {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("bad CSV row in " + path.string());
      return std::stod(cell);
    };
    (void)next();  // x column (grid provides it)
    s.u[j] = next();
    s.dl[j] = next() - x[j];
    s.pi[j] = next();
    s.W[j] = next();
    if (with_rho) s.rho[j] = next();
  }
  return s;
}

inline void write_series_csv(const std::filesystem::path& path,
                             const diagnostics::DiagnosticSeries& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "t,value\n";
  for (std::size_t k = 0; k < series.times.size(); ++k)
    out << format_double(series.times[k]) << ',' << format_double(series.values[k]) << "\n";
}

// FNV-1a over a canonical string; used for config content hashes in manifests.
inline std::string content_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace msflow::io
