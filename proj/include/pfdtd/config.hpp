#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>

#include "pfdtd/core.hpp"
#include "pfdtd/grid.hpp"

namespace pfdtd {

struct ConfigError : InvalidArgument {
  ConfigError(int line, const std::string& msg)
      : InvalidArgument(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line(line) {}
  int line;
};

// ---- TOML-compatible subset --------------------------------------------------
//
//   # comment
//   [table]
//   key = "string" | 42 | 1.5e-3 | true | false
//
// Keys are bare identifiers; tables are single-level.

struct ConfigValue {
  std::variant<std::string, long long, double, bool> v;
  int line = 0;
};

using ConfigTable = std::map<std::string, ConfigValue>;

struct ConfigDocument {
  std::map<std::string, ConfigTable> tables;
  std::map<std::string, int> table_lines;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool is_ident(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

// Strips a trailing comment, ignoring '#' inside a basic string.
inline std::string_view strip_comment(std::string_view s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

inline ConfigValue parse_value(std::string_view raw, int line) {
  ConfigValue out;
  out.line = line;
  if (raw.empty()) throw ConfigError(line, "missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw ConfigError(line, "unterminated string");
    std::string s;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      char c = raw[i];
      if (c == '\\') {
        if (i + 2 >= raw.size()) throw ConfigError(line, "bad escape in string");
        const char e = raw[++i];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: throw ConfigError(line, std::string("unsupported escape \\") + e);
        }
      } else if (c == '"') {
        throw ConfigError(line, "unexpected quote in string");
      }
      s.push_back(c);
    }
    out.v = std::move(s);
    return out;
  }
  if (raw == "true" || raw == "false") {
    out.v = raw == "true";
    return out;
  }
  std::string num;
  for (char c : raw) {
    if (c != '_') num.push_back(c);
  }
  const bool is_float = num.find_first_of(".eE") != std::string::npos || num == "inf" ||
                        num == "+inf" || num == "-inf" || num == "nan";
  try {
    std::size_t used = 0;
    if (is_float) {
      const double d = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing");
      out.v = d;
    } else {
      const long long i = std::stoll(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing");
      out.v = i;
    }
  } catch (const std::exception&) {
    throw ConfigError(line, "cannot parse value '" + std::string(raw) + "'");
  }
  return out;
}

}  // namespace detail

inline ConfigDocument parse_document(std::string_view text) {
  ConfigDocument doc;
  std::string current;  // "" = root table
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "malformed table header");
      const auto name = detail::trim(line.substr(1, line.size() - 2));
      if (!detail::is_ident(name)) throw ConfigError(line_no, "invalid table name");
      current = std::string(name);
      if (doc.table_lines.count(current)) throw ConfigError(line_no, "duplicate table [" + current + "]");
      doc.table_lines[current] = line_no;
      doc.tables[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    if (!detail::is_ident(key)) throw ConfigError(line_no, "invalid key '" + std::string(key) + "'");
    auto& table = doc.tables[current];
    if (table.count(std::string(key))) {
      throw ConfigError(line_no, "duplicate key '" + std::string(key) + "'");
    }
    table[std::string(key)] = detail::parse_value(detail::trim(line.substr(eq + 1)), line_no);
  }
  return doc;
}

// ---- run configuration -------------------------------------------------------

enum class SystemChoice { Scalar, Vector, Both };
enum class DriveKind { Cavity, None };
enum class InitialKind { Cavity, Zero, Random };
enum class VoxelFormat { Csv, Binary };

struct MaterialSpec {
  double eps_r = 1.0;
  double mu_r = 1.0;
  std::string voxel_file;  // empty: uniform
  VoxelFormat voxel_format = VoxelFormat::Csv;
};

struct RunConfig {
  GridSpec grid;
  MaterialSpec materials;
  double dt_factor = 0.999;
  long steps = 600;
  SystemChoice system = SystemChoice::Both;
  DriveKind drive = DriveKind::Cavity;
  InitialKind initial = InitialKind::Cavity;
  std::uint64_t seed = 1;
  double cavity_c_a = 1e-9;
  std::array<int, 3> cavity_modes{3, 1, 1};
  std::string output_dir;
  bool emit_potential = false;
  int threads = 1;

  bool above_cfl() const { return dt_factor > 1.0; }
  bool runs(SystemChoice s) const { return system == SystemChoice::Both || system == s; }
  bool needs_cavity() const { return drive == DriveKind::Cavity || initial == InitialKind::Cavity; }
};

namespace detail {

class TableReader {
 public:
  TableReader(const ConfigDocument& doc, const std::string& name) : name_(name) {
    const auto it = doc.tables.find(name);
    if (it != doc.tables.end()) {
      table_ = &it->second;
      line_ = doc.table_lines.count(name) ? doc.table_lines.at(name) : 0;
    }
  }
  bool present() const { return table_ != nullptr; }
  int line() const { return line_; }
  bool has(const std::string& key) const { return table_ && table_->count(key); }

  std::optional<double> number(const std::string& key) const {
    const ConfigValue* v = find(key);
    if (!v) return std::nullopt;
    if (const auto* d = std::get_if<double>(&v->v)) return *d;
    if (const auto* i = std::get_if<long long>(&v->v)) return static_cast<double>(*i);
    throw ConfigError(v->line, "'" + key + "' must be a number");
  }
  std::optional<long long> integer(const std::string& key) const {
    const ConfigValue* v = find(key);
    if (!v) return std::nullopt;
    if (const auto* i = std::get_if<long long>(&v->v)) return *i;
    throw ConfigError(v->line, "'" + key + "' must be an integer");
  }
  std::optional<std::string> string(const std::string& key) const {
    const ConfigValue* v = find(key);
    if (!v) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&v->v)) return *s;
    throw ConfigError(v->line, "'" + key + "' must be a string");
  }
  std::optional<bool> boolean(const std::string& key) const {
    const ConfigValue* v = find(key);
    if (!v) return std::nullopt;
    if (const auto* b = std::get_if<bool>(&v->v)) return *b;
    throw ConfigError(v->line, "'" + key + "' must be a boolean");
  }
  int key_line(const std::string& key) const {
    const ConfigValue* v = find(key);
    return v ? v->line : line_;
  }

  void reject_unknown(std::initializer_list<const char*> known) const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      bool ok = false;
      for (const char* n : known) ok = ok || k == n;
      if (!ok) throw ConfigError(v.line, "unknown key '" + k + "' in [" + name_ + "]");
    }
  }

 private:
  const ConfigValue* find(const std::string& key) const {
    if (!table_) return nullptr;
    const auto it = table_->find(key);
    return it == table_->end() ? nullptr : &it->second;
  }
  std::string name_;
  const ConfigTable* table_ = nullptr;
  int line_ = 0;
};

template <class E>
E pick(const TableReader& t, const std::string& key, E fallback,
       std::initializer_list<std::pair<const char*, E>> options) {
  const auto s = t.string(key);
  if (!s) return fallback;
  for (const auto& [name, e] : options) {
    if (*s == name) return e;
  }
  throw ConfigError(t.key_line(key), "invalid value '" + *s + "' for '" + key + "'");
}

}  // namespace detail

/// Parses and validates a run configuration. Defaults: dt_factor 0.999,
/// steps 600 (3000 when dt_factor > 1), system both, drive cavity, C_A 1e-9.
inline RunConfig parse_config(std::string_view text) {
  const ConfigDocument doc = parse_document(text);
  for (const auto& [name, table] : doc.tables) {
    if (name.empty()) {
      if (!table.empty()) {
        throw ConfigError(table.begin()->second.line, "keys must live inside a [table]");
      }
      continue;
    }
    if (name != "grid" && name != "materials" && name != "run" && name != "cavity" &&
        name != "output") {
      throw ConfigError(doc.table_lines.at(name), "unknown table [" + name + "]");
    }
  }

  RunConfig cfg;
  const detail::TableReader grid(doc, "grid");
  if (!grid.present()) throw ConfigError(0, "missing [grid] table");
  grid.reject_unknown({"nx", "ny", "nz", "dx", "dy", "dz", "lx", "ly", "lz", "extent"});
  const std::array<const char*, 3> nk{"nx", "ny", "nz"};
  const std::array<const char*, 3> dk{"dx", "dy", "dz"};
  const std::array<const char*, 3> lk{"lx", "ly", "lz"};
  std::array<int, 3> n{};
  Vec3 h{};
  const auto extent = grid.number("extent");
  for (int d = 0; d < 3; ++d) {
    const auto v = grid.integer(nk[d]);
    if (!v) throw ConfigError(grid.line(), std::string("missing grid key '") + nk[d] + "'");
    if (*v < 1 || *v > 1'000'000) throw ConfigError(grid.key_line(nk[d]), std::string("'") + nk[d] + "' must be >= 1");
    n[d] = static_cast<int>(*v);
    const auto sp = grid.number(dk[d]);
    const auto ln = grid.number(lk[d]);
    const int given = (sp ? 1 : 0) + (ln ? 1 : 0) + (extent ? 1 : 0);
    if (given != 1) {
      throw ConfigError(grid.line(), std::string("give exactly one of '") + dk[d] + "', '" + lk[d] +
                                         "' or 'extent'");
    }
    const double val = sp ? *sp : (ln ? *ln / n[d] : *extent / n[d]);
    if (!(val > 0.0) || !std::isfinite(val)) {
      throw ConfigError(grid.line(), std::string("cell size along ") + "xyz"[d] + " must be positive");
    }
    h[d] = val;
  }
  cfg.grid = GridSpec{n[0], n[1], n[2], h[0], h[1], h[2]};

  const detail::TableReader mat(doc, "materials");
  mat.reject_unknown({"eps_r", "mu_r", "voxel_file", "voxel_format"});
  if (auto v = mat.number("eps_r")) cfg.materials.eps_r = *v;
  if (auto v = mat.number("mu_r")) cfg.materials.mu_r = *v;
  if (!(cfg.materials.eps_r > 0.0) || !(cfg.materials.mu_r > 0.0)) {
    throw ConfigError(mat.line(), "eps_r and mu_r must be positive");
  }
  if (auto v = mat.string("voxel_file")) cfg.materials.voxel_file = *v;
  cfg.materials.voxel_format = detail::pick(mat, "voxel_format", VoxelFormat::Csv,
                                            {{"csv", VoxelFormat::Csv}, {"binary", VoxelFormat::Binary}});

  const detail::TableReader run(doc, "run");
  run.reject_unknown({"dt_factor", "steps", "system", "drive", "initial", "seed", "emit_potential",
                      "threads"});
  if (auto v = run.number("dt_factor")) {
    if (!(*v > 0.0) || !std::isfinite(*v)) throw ConfigError(run.key_line("dt_factor"), "dt_factor must be > 0");
    cfg.dt_factor = *v;
  }
  cfg.steps = cfg.above_cfl() ? 3000 : 600;
  if (auto v = run.integer("steps")) {
    if (*v < 1) throw ConfigError(run.key_line("steps"), "steps must be >= 1");
    cfg.steps = static_cast<long>(*v);
  }
  cfg.system = detail::pick(run, "system", SystemChoice::Both,
                            {{"scalar", SystemChoice::Scalar}, {"vector", SystemChoice::Vector},
                             {"both", SystemChoice::Both}});
  cfg.drive = detail::pick(run, "drive", DriveKind::Cavity,
                           {{"cavity", DriveKind::Cavity}, {"none", DriveKind::None}});
  cfg.initial = detail::pick(run, "initial",
                             cfg.drive == DriveKind::Cavity ? InitialKind::Cavity : InitialKind::Zero,
                             {{"cavity", InitialKind::Cavity}, {"zero", InitialKind::Zero},
                              {"random", InitialKind::Random}});
  if (auto v = run.integer("seed")) cfg.seed = static_cast<std::uint64_t>(*v);
  if (auto v = run.boolean("emit_potential")) cfg.emit_potential = *v;
  if (auto v = run.integer("threads")) {
    if (*v < 1) throw ConfigError(run.key_line("threads"), "threads must be >= 1");
    cfg.threads = static_cast<int>(*v);
  }

  const detail::TableReader cav(doc, "cavity");
  cav.reject_unknown({"c_a", "mx", "my", "mz"});
  if (auto v = cav.number("c_a")) {
    if (*v == 0.0 || !std::isfinite(*v)) throw ConfigError(cav.key_line("c_a"), "c_a must be finite and nonzero");
    cfg.cavity_c_a = *v;
  }
  const std::array<const char*, 3> mk{"mx", "my", "mz"};
  for (int d = 0; d < 3; ++d) {
    if (auto v = cav.integer(mk[d])) {
      if (*v < 1) throw ConfigError(cav.key_line(mk[d]), "mode integers must be >= 1");
      cfg.cavity_modes[d] = static_cast<int>(*v);
    }
  }

  const detail::TableReader out(doc, "output");
  out.reject_unknown({"dir"});
  if (auto v = out.string("dir")) cfg.output_dir = *v;

  if (cfg.needs_cavity()) {
    const Vec3 ext = cfg.grid.extent();
    if (std::abs(ext[1] - ext[0]) > 1e-12 * ext[0] || std::abs(ext[2] - ext[0]) > 1e-12 * ext[0]) {
      throw ConfigError(grid.line(), "the cavity drive needs a cubic domain");
    }
    if (!cfg.materials.voxel_file.empty() || cfg.materials.eps_r != 1.0 || cfg.materials.mu_r != 1.0) {
      throw ConfigError(mat.line(), "the cavity drive assumes a vacuum-filled domain");
    }
  }
  return cfg;
}

inline const char* to_string(SystemChoice s) {
  switch (s) {
    case SystemChoice::Scalar: return "scalar";
    case SystemChoice::Vector: return "vector";
    case SystemChoice::Both: return "both";
  }
  return "?";
}

}  // namespace pfdtd
