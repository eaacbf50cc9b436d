#pragma once

// Run configuration: a flat key = value format with [section] headers.
//
//   # comment            blank lines and '#' / ';' comments are ignored
//   [circuit]
//   omega_over_e_l = 1e3
//   phi_ext = 0.5pi      numbers take an optional "pi" factor
//   [sweep]
//   flux = linspace(0, 2pi, 41)
//   delta_e_j_rel = 0, 0.1, 0.2
//
// Lists are comma separated; linspace(a, b, n) and logspace(a, b, n) (base
// 10 exponents) expand to n values. Unknown sections and keys are errors.
// See README.md for the full key table.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zeropi/circuit.hpp"
#include "zeropi/eigensolver.hpp"
#include "zeropi/grid.hpp"

namespace zeropi {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(line > 0 ? "config:" + std::to_string(line) + ":" + std::to_string(column) + ": " + what
                                    : "config: " + what),
        line_(line),
        column_(column) {}
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

enum class RunMode { spectrum, flux_sweep, dmax_grid, ej_optimize, disorder_sweep, dispersive, wavefunction_export };

inline std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::spectrum: return "spectrum";
    case RunMode::flux_sweep: return "flux-sweep";
    case RunMode::dmax_grid: return "dmax-grid";
    case RunMode::ej_optimize: return "ej-optimize";
    case RunMode::disorder_sweep: return "disorder-sweep";
    case RunMode::dispersive: return "dispersive";
    case RunMode::wavefunction_export: return "wavefunction-export";
  }
  return "?";
}

inline std::optional<RunMode> parse_mode(std::string_view s) {
  for (RunMode m : {RunMode::spectrum, RunMode::flux_sweep, RunMode::dmax_grid, RunMode::ej_optimize,
                    RunMode::disorder_sweep, RunMode::dispersive, RunMode::wavefunction_export})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

/// Circuit given either as inverse ratios hbar*omega_p / E or as raw
/// energies; the two styles can't be mixed.
struct CircuitSpec {
  std::optional<double> omega_over_e_l;
  std::optional<double> omega_over_e_c_sigma;
  std::optional<double> omega_over_e_j;
  std::optional<double> e_j;
  std::optional<double> e_l;
  std::optional<double> e_c_sigma;
  std::optional<double> e_cj;
  std::optional<double> e_c;
  double phi_ext = 0.0;

  [[nodiscard]] bool uses_ratios() const {
    return omega_over_e_l || omega_over_e_c_sigma || omega_over_e_j;
  }
  [[nodiscard]] std::optional<double> inductive() const {
    if (omega_over_e_l) return 1.0 / *omega_over_e_l;
    return e_l;
  }
  [[nodiscard]] std::optional<double> sum_charging() const {
    if (omega_over_e_c_sigma) return 1.0 / *omega_over_e_c_sigma;
    return e_c_sigma;
  }

  /// Full parameter set; throws ConfigError naming the missing field.
  [[nodiscard]] CircuitParams resolve() const {
    auto need = [](const std::optional<double>& v, const char* name) {
      if (!v) throw ConfigError(std::string("circuit.") + name + " is required");
      return *v;
    };
    try {
      if (uses_ratios())
        return CircuitParams::from_ratios(need(omega_over_e_l, "omega_over_e_l"),
                                          need(omega_over_e_c_sigma, "omega_over_e_c_sigma"),
                                          need(omega_over_e_j, "omega_over_e_j"), phi_ext);
      const double ej = need(e_j, "e_j");
      return CircuitParams::from_energies(ej, need(e_l, "e_l"), need(e_c_sigma, "e_c_sigma"),
                                          e_cj ? *e_cj : 1.0 / (8.0 * ej), e_c, phi_ext);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
  }
};

struct RunConfig {
  RunMode mode = RunMode::spectrum;
  bool mode_set = false;
  CircuitSpec circuit;
  DisorderParams disorder;

  // [solver]
  std::size_t k = 6;
  GridQuality quality = GridQuality::standard;
  bool refine = true;
  SolverOptions solver;

  // [sweep]
  std::vector<double> flux;
  std::vector<double> delta_e_j;      // absolute
  std::vector<double> delta_e_j_rel;  // relative to E_J
  std::vector<double> delta_c_j_rel;
  std::vector<double> omega_over_e_l;
  std::vector<double> omega_over_e_c_sigma;
  std::vector<double> e_l;
  std::vector<double> e_c_sigma;
  std::size_t ej_scan_points = 25;
  double log10_ej_min = -1.5;
  double log10_ej_max = 0.0;
  double ej_relative_tol = 0.01;

  // [run]
  std::string out_dir = "out";
  std::size_t workers = 1;
  std::vector<std::size_t> levels{0, 1};
  double resonance_factor = 10.0;
  std::optional<double> plasma_frequency;  // Hz, enables the SI report
  bool dump_matrix = false;

  [[nodiscard]] std::vector<double> el_axis() const {
    if (!e_l.empty()) return e_l;
    std::vector<double> v;
    for (double r : omega_over_e_l) v.push_back(1.0 / r);
    return v;
  }
  [[nodiscard]] std::vector<double> ecs_axis() const {
    if (!e_c_sigma.empty()) return e_c_sigma;
    std::vector<double> v;
    for (double r : omega_over_e_c_sigma) v.push_back(1.0 / r);
    return v;
  }

  /// Cross-field checks; throws ConfigError naming the field.
  void validate() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

struct Located {
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;  // 1-based column of the value
};

/// Number with an optional "pi" factor: "2", "-0.5pi", "pi", "2*pi".
inline double parse_number(const Located& v) {
  std::string s = trim(v.text);
  if (s.empty()) throw ConfigError("expected a number", v.line, v.column);
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = std::numbers::pi;
    s = trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s.empty() || s == "+") return factor;
    if (s == "-") return -factor;
  }
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + trim(v.text) + "'", v.line, v.column);
  }
  if (used != s.size() || !std::isfinite(x))
    throw ConfigError("expected a number, got '" + trim(v.text) + "'", v.line, v.column);
  return x * factor;
}

inline std::vector<Located> split_commas(const Located& v) {
  std::vector<Located> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= v.text.size(); ++i) {
    if (i == v.text.size() || v.text[i] == ',') {
      out.push_back({v.text.substr(start, i - start), v.line, v.column + start});
      start = i + 1;
    }
  }
  return out;
}

inline std::size_t parse_count(const Located& v) {
  const double x = parse_number(v);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e9)
    throw ConfigError("expected a non-negative integer, got '" + trim(v.text) + "'", v.line, v.column);
  return static_cast<std::size_t>(x);
}

inline std::vector<double> parse_list(const Located& v) {
  const std::string s = trim(v.text);
  for (const char* fn : {"linspace", "logspace"}) {
    const std::string name = fn;
    if (s.rfind(name, 0) != 0) continue;
    const std::string rest = trim(s.substr(name.size()));
    if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')')
      throw ConfigError(name + " needs the form " + name + "(a, b, n)", v.line, v.column);
    const std::size_t open = v.text.find('(');
    Located inner{rest.substr(1, rest.size() - 2), v.line, v.column + open + 1};
    const auto args = split_commas(inner);
    if (args.size() != 3) throw ConfigError(name + " takes exactly 3 arguments", v.line, v.column);
    const double a = parse_number(args[0]);
    const double b = parse_number(args[1]);
    const std::size_t n = parse_count(args[2]);
    if (n < 1) throw ConfigError(name + " needs n >= 1", args[2].line, args[2].column);
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
      out.push_back(name == "logspace" ? std::pow(10.0, t) : t);
    }
    if (n > 1) out.back() = name == "logspace" ? std::pow(10.0, b) : b;
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split_commas(v)) out.push_back(parse_number(item));
  return out;
}

inline bool parse_bool(const Located& v) {
  const std::string s = trim(v.text);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError("expected true or false, got '" + s + "'", v.line, v.column);
}

inline GridQuality parse_quality(const Located& v) {
  const std::string s = trim(v.text);
  if (s == "coarse") return GridQuality::coarse;
  if (s == "standard") return GridQuality::standard;
  if (s == "fine") return GridQuality::fine;
  throw ConfigError("quality must be coarse, standard or fine, got '" + s + "'", v.line, v.column);
}

}  // namespace detail

inline RunConfig parse_config(std::string_view text) {
  using detail::Located;
  RunConfig cfg;
  std::string section;
  std::map<std::string, std::size_t> seen;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') {
      if (eol == text.size()) break;
      continue;
    }
    // trailing comments
    for (char c : {'#', ';'})
      if (auto at = line.find(c); at != std::string::npos) line.erase(at);

    if (line[first] == '[') {
      const std::size_t close = line.find(']', first);
      if (close == std::string::npos || !detail::trim(line.substr(close + 1)).empty())
        throw ConfigError("malformed section header", line_no, first + 1);
      section = detail::trim(line.substr(first + 1, close - first - 1));
      if (section != "circuit" && section != "disorder" && section != "solver" && section != "sweep" &&
          section != "run")
        throw ConfigError("unknown section [" + section + "]", line_no, first + 2);
      if (eol == text.size()) break;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line_no, first + 1);
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("empty key", line_no, first + 1);
    if (section.empty()) throw ConfigError("key '" + key + "' outside of a section", line_no, first + 1);
    const std::size_t vstart = line.find_first_not_of(" \t", eq + 1);
    const Located v{vstart == std::string::npos ? std::string() : line.substr(vstart), line_no,
                    (vstart == std::string::npos ? eq + 1 : vstart) + 1};
    const std::string full = section + "." + key;
    if (auto it = seen.find(full); it != seen.end())
      throw ConfigError("duplicate key '" + full + "' (first set on line " + std::to_string(it->second) + ")",
                        line_no, first + 1);
    seen[full] = line_no;

    auto number = [&] { return detail::parse_number(v); };
    auto count = [&] { return detail::parse_count(v); };
    auto list = [&] { return detail::parse_list(v); };
    bool known = true;

    if (section == "circuit") {
      auto& c = cfg.circuit;
      if (key == "omega_over_e_l") c.omega_over_e_l = number();
      else if (key == "omega_over_e_c_sigma") c.omega_over_e_c_sigma = number();
      else if (key == "omega_over_e_j") c.omega_over_e_j = number();
      else if (key == "e_j") c.e_j = number();
      else if (key == "e_l") c.e_l = number();
      else if (key == "e_c_sigma") c.e_c_sigma = number();
      else if (key == "e_cj") c.e_cj = number();
      else if (key == "e_c") c.e_c = number();
      else if (key == "phi_ext") c.phi_ext = number();
      else known = false;
    } else if (section == "disorder") {
      auto& d = cfg.disorder;
      if (key == "delta_e_j") d.delta_e_j = number();
      else if (key == "delta_c_j_rel") d.delta_c_j_rel = number();
      else if (key == "delta_c_rel") d.delta_c_rel = number();
      else if (key == "delta_e_l") d.delta_e_l = number();
      else known = false;
    } else if (section == "solver") {
      if (key == "k") cfg.k = count();
      else if (key == "quality") cfg.quality = detail::parse_quality(v);
      else if (key == "tol") cfg.solver.tol = number();
      else if (key == "refine") cfg.refine = detail::parse_bool(v);
      else if (key == "krylov_steps") cfg.solver.krylov_steps = count();
      else if (key == "max_cycles") cfg.solver.max_cycles = count();
      else if (key == "extra_vectors") cfg.solver.extra_vectors = count();
      else if (key == "verify_count") cfg.solver.verify_count = detail::parse_bool(v);
      else known = false;
    } else if (section == "sweep") {
      if (key == "flux") cfg.flux = list();
      else if (key == "delta_e_j") cfg.delta_e_j = list();
      else if (key == "delta_e_j_rel") cfg.delta_e_j_rel = list();
      else if (key == "delta_c_j_rel") cfg.delta_c_j_rel = list();
      else if (key == "omega_over_e_l") cfg.omega_over_e_l = list();
      else if (key == "omega_over_e_c_sigma") cfg.omega_over_e_c_sigma = list();
      else if (key == "e_l") cfg.e_l = list();
      else if (key == "e_c_sigma") cfg.e_c_sigma = list();
      else if (key == "ej_scan_points") cfg.ej_scan_points = count();
      else if (key == "log10_ej_min") cfg.log10_ej_min = number();
      else if (key == "log10_ej_max") cfg.log10_ej_max = number();
      else if (key == "ej_relative_tol") cfg.ej_relative_tol = number();
      else known = false;
    } else if (section == "run") {
      if (key == "mode") {
        const auto m = parse_mode(detail::trim(v.text));
        if (!m) throw ConfigError("unknown mode '" + detail::trim(v.text) + "'", v.line, v.column);
        cfg.mode = *m;
        cfg.mode_set = true;
      } else if (key == "out") {
        cfg.out_dir = detail::trim(v.text);
      } else if (key == "workers") {
        cfg.workers = count();
      } else if (key == "seed") {
        const double s = number();
        if (!(s >= 0.0) || s != std::floor(s) || s >= 1.8e19)
          throw ConfigError("seed must be a non-negative integer", v.line, v.column);
        cfg.solver.seed = static_cast<std::uint64_t>(s);
      } else if (key == "levels") {
        cfg.levels.clear();
        for (const auto& item : detail::split_commas(v)) cfg.levels.push_back(detail::parse_count(item));
      } else if (key == "resonance_factor") {
        cfg.resonance_factor = number();
      } else if (key == "plasma_frequency") {
        cfg.plasma_frequency = number();
      } else if (key == "dump_matrix") {
        cfg.dump_matrix = detail::parse_bool(v);
      } else {
        known = false;
      }
    }
    if (!known) throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no, first + 1);
    if (eol == text.size()) break;
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (!(solver.tol > 0.0)) fail("solver.tol must be positive");
  if (k < 1) fail("solver.k must be at least 1");
  if (solver.krylov_steps < 1) fail("solver.krylov_steps must be at least 1");
  if (solver.max_cycles < 1) fail("solver.max_cycles must be at least 1");
  if (workers < 1) fail("run.workers must be at least 1");
  if (!(resonance_factor >= 0.0)) fail("run.resonance_factor must be non-negative");
  if (plasma_frequency && !(*plasma_frequency > 0.0)) fail("run.plasma_frequency must be positive");
  if (out_dir.empty()) fail("run.out must not be empty");

  const CircuitSpec& c = circuit;
  if (c.uses_ratios() && (c.e_j || c.e_l || c.e_c_sigma || c.e_cj || c.e_c))
    fail("circuit: give either omega_over_* ratios or raw energies, not both");
  try {
    disorder.validate();
  } catch (const std::invalid_argument& ex) {
    fail(ex.what());
  }

  const bool needs_d = mode != RunMode::wavefunction_export && mode != RunMode::dispersive;
  if (needs_d && k < 3) fail("solver.k must be at least 3 for D");

  switch (mode) {
    case RunMode::spectrum:
    case RunMode::dispersive:
    case RunMode::wavefunction_export: (void)c.resolve(); break;
    case RunMode::flux_sweep:
      (void)c.resolve();
      if (flux.empty()) fail("sweep.flux is required for flux-sweep");
      break;
    case RunMode::disorder_sweep: {
      (void)c.resolve();
      const int given = !delta_e_j.empty() + !delta_e_j_rel.empty() + !delta_c_j_rel.empty();
      if (given != 1) fail("disorder-sweep needs exactly one of sweep.delta_e_j, sweep.delta_e_j_rel, sweep.delta_c_j_rel");
      break;
    }
    case RunMode::ej_optimize:
      if (!c.inductive()) fail("circuit.omega_over_e_l (or e_l) is required");
      if (!c.sum_charging()) fail("circuit.omega_over_e_c_sigma (or e_c_sigma) is required");
      if (ej_scan_points < 3) fail("sweep.ej_scan_points must be at least 3");
      if (!(log10_ej_max > log10_ej_min)) fail("sweep.log10_ej_max must exceed sweep.log10_ej_min");
      if (!(ej_relative_tol > 0.0)) fail("sweep.ej_relative_tol must be positive");
      break;
    case RunMode::dmax_grid:
      if (!e_l.empty() && !omega_over_e_l.empty()) fail("sweep: give e_l or omega_over_e_l, not both");
      if (!e_c_sigma.empty() && !omega_over_e_c_sigma.empty())
        fail("sweep: give e_c_sigma or omega_over_e_c_sigma, not both");
      if (el_axis().empty()) fail("sweep.omega_over_e_l (or e_l) is required for dmax-grid");
      if (ecs_axis().empty()) fail("sweep.omega_over_e_c_sigma (or e_c_sigma) is required for dmax-grid");
      for (double v : el_axis())
        if (!(v > 0.0)) fail("sweep: E_L axis values must be positive");
      for (double v : ecs_axis())
        if (!(v > 0.0)) fail("sweep: E_CSigma axis values must be positive");
      if (ej_scan_points < 3) fail("sweep.ej_scan_points must be at least 3");
      if (!(log10_ej_max > log10_ej_min)) fail("sweep.log10_ej_max must exceed sweep.log10_ej_min");
      if (!(ej_relative_tol > 0.0)) fail("sweep.ej_relative_tol must be positive");
      break;
  }
  if (mode == RunMode::wavefunction_export)
    for (std::size_t l : levels)
      if (l >= k) fail("run.levels: level " + std::to_string(l) + " is not below solver.k");
}

}  // namespace zeropi
