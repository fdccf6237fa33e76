#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "homogbench/bvp.hpp"
#include "homogbench/common.hpp"
#include "homogbench/effective.hpp"
#include "homogbench/field.hpp"
#include "homogbench/ratefit.hpp"

namespace homog::io {

// ---------------------------------------------------------------------------
// PFGRID v1: one ASCII header line `PFGRID 1 <d> <n> <components>`, then
// little-endian float64, nodes in row-major order with all components of a
// node stored together.

struct RawGrid {
  int dim = 1, n = 0, comps = 1;
  std::vector<double> data;  // node-major, comps interleaved
};

inline void write_pfgrid(const std::string& path, int dim, int n, int comps,
                         const double* comp_major, std::size_t nodes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_pfgrid: cannot open " + path);
  out << "PFGRID 1 " << dim << " " << n << " " << comps << "\n";
  std::vector<double> row(comps);
  for (std::size_t g = 0; g < nodes; ++g) {
    for (int c = 0; c < comps; ++c) row[c] = comp_major[c * nodes + g];
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(sizeof(double) * comps));
  }
  if (!out) throw Error("write_pfgrid: write failed for " + path);
}

inline void write_pfgrid(const std::string& path, const PeriodicField& f) {
  write_pfgrid(path, f.dim(), f.n(), f.comps(), f.data().data(), f.nodes());
}

inline void write_pfgrid(const std::string& path, const DomainSolution& u) {
  write_pfgrid(path, u.grid.dim, u.grid.N + 2, 1, u.values.data(),
               u.values.size());
}

inline RawGrid read_pfgrid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_pfgrid: cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic;
  int version = 0;
  RawGrid g;
  hs >> magic >> version >> g.dim >> g.n >> g.comps;
  if (magic != "PFGRID" || version != 1 || g.dim < 1 || g.dim > 2 || g.n < 1 ||
      g.comps < 1)
    throw Error("read_pfgrid: bad header in " + path);
  std::size_t nodes = g.dim == 1 ? std::size_t(g.n)
                                 : std::size_t(g.n) * std::size_t(g.n);
  g.data.resize(nodes * g.comps);
  in.read(reinterpret_cast<char*>(g.data.data()),
          std::streamsize(g.data.size() * sizeof(double)));
  if (std::size_t(in.gcount()) != g.data.size() * sizeof(double))
    throw Error("read_pfgrid: truncated payload in " + path);
  return g;
}

inline PeriodicField to_field(const RawGrid& g) {
  PeriodicField f(g.dim, g.n, g.comps);
  auto& d = f.mutable_data();
  const std::size_t nodes = f.nodes();
  for (std::size_t node = 0; node < nodes; ++node)
    for (int c = 0; c < g.comps; ++c)
      d[std::size_t(c) * nodes + node] = g.data[node * g.comps + c];
  return f;
}

// ---------------------------------------------------------------------------
// CSV: comma separated, '.' decimal, header row, full double precision.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
  if (!out) throw Error("write_csv: cannot open " + path);
  for (std::size_t c = 0; c < header.size(); ++c)
    out << (c ? "," : "") << header[c];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << format_double(row[c]);
    out << "\n";
  }
  if (!out) throw Error("write_csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// JSON report fragments.

inline nlohmann::json to_json(const RateReport& r) {
  nlohmann::json j;
  j["experiment"] = r.experiment;
  j["slope"] = r.slope;
  j["intercept"] = r.intercept;
  j["r2"] = r.r2;
  j["identically_zero"] = r.identically_zero;
  auto& pts = j["points"] = nlohmann::json::array();
  for (auto& [x, y] : r.points) pts.push_back({x, y});
  return j;
}

inline nlohmann::json to_json(const EffectiveTensor& T) {
  nlohmann::json j;
  j["dim"] = T.dim;
  j["m"] = T.m;
  j["entries"] = T.entries;
  j["provenance"] = T.provenance;
  j["symmetry_deviation"] = T.symmetry_deviation;
  j["ellipticity"] = {T.ell_lo, T.ell_hi};
  return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace homog::io
