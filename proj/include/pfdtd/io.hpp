#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pfdtd/config.hpp"
#include "pfdtd/core.hpp"

namespace pfdtd {

// ---- time series CSV ---------------------------------------------------------

struct TimeSeriesRow {
  long step = 0;
  double t = 0;
  double storage = 0;
  double supply_step = 0;
  double supply_cum = 0;
  double init_plus_supplied = 0;
  double residual = 0;
  double max_abs_state = 0;
  double max_abs_potential = 0;  // written only when requested
};

inline std::string timeseries_header(bool with_potential) {
  std::string h = "step,t,storage,supply_step,supply_cum,init_plus_supplied,residual,max_abs_state";
  if (with_potential) h += ",max_abs_potential";
  return h;
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string timeseries_line(const TimeSeriesRow& r, bool with_potential) {
  std::string s = std::to_string(r.step);
  for (double v : {r.t, r.storage, r.supply_step, r.supply_cum, r.init_plus_supplied, r.residual,
                   r.max_abs_state}) {
    s += ',';
    s += format_g17(v);
  }
  if (with_potential) {
    s += ',';
    s += format_g17(r.max_abs_potential);
  }
  return s;
}

inline void write_timeseries(std::ostream& os, const std::vector<TimeSeriesRow>& rows,
                             bool with_potential) {
  os << timeseries_header(with_potential) << '\n';
  for (const auto& r : rows) os << timeseries_line(r, with_potential) << '\n';
}

inline std::vector<TimeSeriesRow> read_timeseries(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("csv: empty input");
  const bool with_potential = line == timeseries_header(true);
  if (!with_potential && line != timeseries_header(false)) throw InvalidArgument("csv: unexpected header");
  std::vector<TimeSeriesRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    require_size(cols.size(), with_potential ? 9u : 8u, "csv: column count");
    TimeSeriesRow r;
    r.step = std::stol(cols[0]);
    double* fields[] = {&r.t, &r.storage, &r.supply_step, &r.supply_cum, &r.init_plus_supplied,
                        &r.residual, &r.max_abs_state, &r.max_abs_potential};
    for (std::size_t i = 1; i < cols.size(); ++i) *fields[i - 1] = std::stod(cols[i]);
    rows.push_back(r);
  }
  return rows;
}

// ---- voxel materials ---------------------------------------------------------
//
// One (eps_r, mu_r) pair per cell, cell order i-major with k fastest.
// CSV: one "eps_r,mu_r" pair per line, '#' comments allowed.
// Binary: native-endian float64 pairs, no header.

struct VoxelData {
  std::vector<double> eps_r;
  std::vector<double> mu_r;
};

inline VoxelData load_voxels(const std::string& path, VoxelFormat format, std::size_t cells) {
  VoxelData d;
  d.eps_r.reserve(cells);
  d.mu_r.reserve(cells);
  if (format == VoxelFormat::Binary) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("voxels: cannot open '" + path + "'");
    std::vector<double> buf(2 * cells);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != buf.size() * sizeof(double) || in.peek() != EOF) {
      throw SizeMismatch("voxels: '" + path + "' must hold exactly " + std::to_string(cells) +
                         " float64 pairs");
    }
    for (std::size_t c = 0; c < cells; ++c) {
      d.eps_r.push_back(buf[2 * c]);
      d.mu_r.push_back(buf[2 * c + 1]);
    }
  } else {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("voxels: cannot open '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto body = detail::trim(detail::strip_comment(line));
      if (body.empty()) continue;
      const auto comma = body.find(',');
      if (comma == std::string_view::npos) {
        throw ConfigError(line_no, "voxels: expected 'eps_r,mu_r'");
      }
      try {
        d.eps_r.push_back(std::stod(std::string(body.substr(0, comma))));
        d.mu_r.push_back(std::stod(std::string(body.substr(comma + 1))));
      } catch (const std::exception&) {
        throw ConfigError(line_no, "voxels: cannot parse '" + std::string(body) + "'");
      }
    }
    if (d.eps_r.size() != cells) {
      throw SizeMismatch("voxels: '" + path + "' has " + std::to_string(d.eps_r.size()) +
                         " cells, grid has " + std::to_string(cells));
    }
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (!(d.eps_r[c] > 0.0) || !(d.mu_r[c] > 0.0) || !std::isfinite(d.eps_r[c]) ||
        !std::isfinite(d.mu_r[c])) {
      throw InvalidArgument("voxels: cell " + std::to_string(c) + " has a non-positive value");
    }
  }
  return d;
}

}  // namespace pfdtd
