#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dcl/asymptotics.hpp"
#include "dcl/errors.hpp"
#include "dcl/grid.hpp"
#include "dcl/packet.hpp"

namespace dcl {

// Full description of one experiment: physical parameters plus the lattices
// the field-level operations run on.  Everything downstream is a pure
// function of one of these.
struct ExperimentConfig {
  double epsilon = 0.01;
  double alpha = 2.0;
  double sigma = 0.01;
  double R0 = 50.0;
  double P0 = 1.0;
  double delta = 30.0;
  double q0 = 2.0;
  double r0 = 0.0;
  double tau = 1.0;
  double boundary_threshold = 1e-4;
  Grid grid_r{};
  Grid grid_R{};
  // auto-derived pieces are recomputed whenever a sweep moves a parameter
  bool r0_auto = true;
  bool grids_auto = true;

  AsymptoticParams params() const {
    AsymptoticParams p;
    p.light = LightPacket{delta, q0, r0};
    p.heavy = HeavyPair{sigma, R0, P0};
    p.alpha = alpha;
    p.eps = epsilon;
    p.tau = tau;
    return p;
  }
};

namespace detail {

inline std::size_t next_pow2(double x) {
  std::size_t n = 64;
  while (double(n) < x) n *= 2;
  return n;
}

} // namespace detail

// Launch-point rule keeping the light support strictly left of both barriers.
inline double auto_r0(const ExperimentConfig& c) {
  return -(c.R0 + c.sigma + c.delta + 1.0);
}

// Lattice sizing: extents cover every packet support plus its maximal drift
// (light: q0*tau/eps; heavy: P0*tau), Nyquist covers four times the packet
// momentum content.
inline Grid auto_grid_r(const ExperimentConfig& c) {
  const double half = std::ceil(std::abs(c.r0) + c.R0 + c.q0 * c.tau / c.epsilon +
                                10.0 * c.delta) + 1.0;
  const double kreq = 4.0 * (c.q0 + 3.0 / c.delta);
  return make_grid(-half, half, detail::next_pow2(std::ceil(2.0 * half * kreq / kPi)));
}

inline Grid auto_grid_R(const ExperimentConfig& c) {
  const double half =
      std::ceil(c.R0 + c.sigma + c.P0 * c.tau + 10.0 * c.sigma) + 1.0;
  const double kreq = 4.0 * (c.P0 + 3.0 / c.sigma);
  return make_grid(-half, half, detail::next_pow2(std::ceil(2.0 * half * kreq / kPi)));
}

// Reject configurations outside the regime every formula in the library
// assumes; each message names the violated condition.
inline void validate(const ExperimentConfig& c) {
  auto req = [](bool ok, const char* what) {
    if (!ok) throw config_error(std::string("config: ") + what);
  };
  req(c.sigma > 0.0, "sigma must be positive");
  req(c.R0 > 0.0, "R0 must be positive");
  req(c.P0 > 0.0, "P0 must be positive");
  req(c.delta > 0.0, "delta must be positive");
  req(c.q0 > 0.0, "q0 must be positive");
  req(c.R0 > 2.0 * c.sigma, "R0 must exceed 2*sigma (separated heavy branches)");
  req(c.r0 < -c.R0 - c.sigma - c.delta,
      "r0 must place the light support left of both barriers");
  req(c.epsilon > 0.0 && c.epsilon < 1.0, "epsilon must lie in (0, 1)");
  req(c.alpha >= 0.0, "alpha must be nonnegative");
  req(c.tau > 0.0, "tau must be positive");
  req(std::isfinite(c.boundary_threshold) && c.boundary_threshold > 0.0,
      "boundary_threshold must be positive");
  const double mr = c.q0 * c.tau / c.epsilon;
  req(c.grid_r.n > 0 && c.grid_r.xmin <= c.r0 - c.delta - mr &&
          c.grid_r.xmax >= c.r0 + c.delta + mr,
      "grid_r must cover the light support with the flight margin");
  const double mR = c.P0 * c.tau;
  req(c.grid_R.n > 0 && c.grid_R.xmin <= -c.R0 - c.sigma - mR &&
          c.grid_R.xmax >= c.R0 + c.sigma + mR,
      "grid_R must cover the heavy supports with the drift margin");
}

// Resolve the auto pieces, then validate.  Sweeps call this after every
// parameter substitution.
inline void finalize(ExperimentConfig& c) {
  if (c.r0_auto) c.r0 = auto_r0(c);
  if (c.grids_auto) {
    if (!(c.delta > 0.0 && c.sigma > 0.0 && c.epsilon > 0.0 && c.tau > 0.0 &&
          c.q0 > 0.0 && c.P0 > 0.0))
      throw config_error("config: cannot size grids from non-positive parameters");
    c.grid_r = auto_grid_r(c);
    c.grid_R = auto_grid_R(c);
  }
  validate(c);
}

// ---- flat key = value text form ------------------------------------------

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto notspace = [](unsigned char ch) { return !std::isspace(ch); };
    line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
    line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config: line " + std::to_string(lineno) + " is not key = value");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
    val.erase(val.begin(), std::find_if(val.begin(), val.end(), notspace));
    if (key.empty() || val.empty())
      throw config_error("config: line " + std::to_string(lineno) + " is missing a key or value");
    if (!kv.emplace(key, val).second)
      throw config_error("config: duplicate key '" + key + "'");
  }

  auto number = [&](const std::string& key) {
    const std::string& s = kv.at(key);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw config_error("config: value of '" + key + "' is not a number: " + s);
    return v;
  };
  auto integer = [&](const std::string& key) {
    const std::string& s = kv.at(key);
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw config_error("config: value of '" + key + "' is not a positive integer: " + s);
    return v;
  };

  static const char* const required[] = {"epsilon", "alpha", "sigma", "R0", "P0",
                                         "delta", "q0", "tau"};
  static const char* const optional[] = {"r0", "boundary_threshold", "grid_r_half",
                                         "grid_r_n", "grid_R_half", "grid_R_n"};
  for (const auto& [key, val] : kv) {
    const auto in_list = [&](auto& list) {
      return std::find_if(std::begin(list), std::end(list),
                          [&](const char* s) { return key == s; }) != std::end(list);
    };
    if (!in_list(required) && !in_list(optional))
      throw config_error("config: unknown key '" + key + "'");
  }
  for (const char* key : required)
    if (!kv.count(key)) throw config_error(std::string("config: missing key '") + key + "'");

  ExperimentConfig c;
  c.epsilon = number("epsilon");
  c.alpha = number("alpha");
  c.sigma = number("sigma");
  c.R0 = number("R0");
  c.P0 = number("P0");
  c.delta = number("delta");
  c.q0 = number("q0");
  c.tau = number("tau");
  if (kv.count("boundary_threshold")) c.boundary_threshold = number("boundary_threshold");
  if (kv.count("r0")) {
    c.r0 = number("r0");
    c.r0_auto = false;
  }
  const int grid_keys = int(kv.count("grid_r_half")) + int(kv.count("grid_r_n")) +
                        int(kv.count("grid_R_half")) + int(kv.count("grid_R_n"));
  if (grid_keys == 4) {
    const double hr = number("grid_r_half"), hR = number("grid_R_half");
    if (!(hr > 0.0 && hR > 0.0)) throw config_error("config: grid half-widths must be positive");
    c.grid_r = make_grid(-hr, hr, integer("grid_r_n"));
    c.grid_R = make_grid(-hR, hR, integer("grid_R_n"));
    c.grids_auto = false;
  } else if (grid_keys != 0) {
    throw config_error("config: grid keys must be given all together or not at all");
  }
  finalize(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open " + path);
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config_text(body.str());
}

// The shipped desk-scale regime: every working assumption of the closed
// forms holds with a wide margin, and the barrier is half-transparent at the
// packet momentum.
inline const char* default_config_text() {
  return "# desk-scale reference regime\n"
         "epsilon = 0.01\n"
         "alpha = 2\n"
         "q0 = 2\n"
         "delta = 30\n"
         "sigma = 0.01\n"
         "R0 = 50\n"
         "P0 = 1\n"
         "tau = 1\n"
         "# r0 and the lattices are derived: r0 = -(R0 + sigma + delta + 1),\n"
         "# grids by the coverage rule\n";
}

inline ExperimentConfig default_config() { return parse_config_text(default_config_text()); }

// ---- canonical text and hashing ------------------------------------------

// One line per effective value in fixed order; the hash of this text
// identifies the exact experiment in every sweep row.
inline std::string canonical_text(const ExperimentConfig& c) {
  char buf[64];
  std::string out;
  const auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
    out += buf;
  };
  put("P0", c.P0);
  put("R0", c.R0);
  put("alpha", c.alpha);
  put("boundary_threshold", c.boundary_threshold);
  put("delta", c.delta);
  put("epsilon", c.epsilon);
  put("grid_R_half", c.grid_R.xmax);
  put("grid_R_n", double(c.grid_R.n));
  put("grid_r_half", c.grid_r.xmax);
  put("grid_r_n", double(c.grid_r.n));
  put("q0", c.q0);
  put("r0", c.r0);
  put("sigma", c.sigma);
  put("tau", c.tau);
  return out;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical_text(c))));
  return std::string(buf);
}

} // namespace dcl
