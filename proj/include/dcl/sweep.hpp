#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dcl/decoherence.hpp"
#include "dcl/errors.hpp"
#include "dcl/exact_evolution.hpp"
#include "dcl/experiment.hpp"

namespace dcl {

// The canonical experiment ladders.  Each kind pins the swept parameter and
// the error quantity whose scaling the ladder probes:
//   epsilon_rate      mass ratio        -> full-evolution vs closed-form gap
//   dq0_decay         delta * q0        -> entangled-approximation gap
//   sigma_alpha_decay sigma * alpha     -> entangled-approximation gap
//   d_decay           separation * alpha-> branch-overlap magnitude
//   single_run        (no ladder)       -> decomposition cross-check errors
enum class SweepKind { epsilon_rate, dq0_decay, sigma_alpha_decay, d_decay, single_run };

inline const char* to_string(SweepKind k) {
  switch (k) {
    case SweepKind::epsilon_rate: return "epsilon_rate";
    case SweepKind::dq0_decay: return "dq0_decay";
    case SweepKind::sigma_alpha_decay: return "sigma_alpha_decay";
    case SweepKind::d_decay: return "d_decay";
    case SweepKind::single_run: return "single_run";
  }
  return "?";
}

inline SweepKind parse_sweep_kind(const std::string& s) {
  for (SweepKind k : {SweepKind::epsilon_rate, SweepKind::dq0_decay,
                      SweepKind::sigma_alpha_decay, SweepKind::d_decay, SweepKind::single_run})
    if (s == to_string(k)) return k;
  throw config_error("sweep: unknown kind '" + s + "'");
}

struct SweepSpec {
  SweepKind kind = SweepKind::single_run;
  ExperimentConfig base;
  std::vector<double> ladder;
  std::string out_dir;
};

struct SweepRow {
  double parameter = 0.0;
  std::string status = "ok"; // ok | config_error | invariant_violation | numerical_guard
  std::string message;
  cplx lambda = 0.0;
  double transmission_probability = 0.0;
  double overlap_abs = 0.0;
  double bound_I = 0.0;
  double tail = 0.0;
  double norm_error = 0.0; // the quantity this sweep kind tracks
  double zeta1 = 0.0, zeta2 = 0.0, zeta3 = 0.0;
  double bound_zeta1 = 0.0, bound_zeta23 = 0.0;
  double boundary_mass = 0.0;
  std::string config_hash;
  bool ok() const { return status == "ok"; }
};

struct SweepResult {
  SweepKind kind = SweepKind::single_run;
  std::vector<SweepRow> rows;
  std::optional<double> fitted_rate; // log-log slope over successful rows
};

namespace detail {

// (X, y)-frame lattice for the exact evolver: the relative coordinate spans
// every difference r - R the tensor grids can form, at the finer of the two
// sample steps.
inline Grid relative_grid(const Grid& gr, const Grid& gR) {
  const double lo = gr.xmin - gR.xmax, hi = gr.xmax - gR.xmin;
  const double h = std::min(gr.h(), gR.h());
  return make_grid(lo, hi, next_pow2((hi - lo) / h));
}

inline ExperimentConfig at_parameter(const ExperimentConfig& base, SweepKind kind, double v) {
  ExperimentConfig c = base;
  switch (kind) {
    case SweepKind::epsilon_rate:
      c.epsilon = v;
      break;
    case SweepKind::dq0_decay:
      c.delta = v / c.q0;
      break;
    case SweepKind::sigma_alpha_decay:
      c.alpha = v / c.sigma;
      break;
    case SweepKind::d_decay:
      if (!(c.alpha > 0.0))
        throw config_error("sweep: d_decay needs positive coupling to place the ladder");
      c.R0 = v / (2.0 * c.alpha);
      break;
    case SweepKind::single_run:
      break;
  }
  finalize(c);
  return c;
}

inline void fill_report(SweepRow& row, const DecoherenceReport& rep) {
  row.lambda = rep.lambda;
  row.transmission_probability = rep.transmission_probability;
  row.overlap_abs = std::abs(rep.overlap_I);
  row.bound_I = rep.bound_I;
  row.tail = rep.tail;
}

inline std::string iso_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_point_manifest(const std::string& dir, std::size_t index,
                                 const ExperimentConfig& cfg, const SweepRow& row,
                                 double wall_ms) {
  char name[48];
  std::snprintf(name, sizeof name, "point_%03zu.manifest", index);
  const std::string path = dir + "/" + name;
  std::ofstream out(path);
  if (!out) throw config_error("sweep: cannot open " + path);
  char buf[96];
  out << "# per-point run record; timestamps and wall times live here only\n";
  std::snprintf(buf, sizeof buf, "index = %zu\n", index);
  out << buf;
  std::snprintf(buf, sizeof buf, "parameter = %.17g\n", row.parameter);
  out << buf;
  out << "status = " << row.status << "\n";
  if (!row.message.empty()) out << "message = " << row.message << "\n";
  out << "config_hash = " << row.config_hash << "\n";
  out << canonical_text(cfg);
  std::snprintf(buf, sizeof buf, "boundary_mass_max = %.17g\n", row.boundary_mass);
  out << buf;
  std::snprintf(buf, sizeof buf, "wall_ms = %.3f\n", wall_ms);
  out << buf;
  out << "timestamp = " << iso_timestamp() << "\n";
  if (!out) throw config_error("sweep: I/O failure on " + path);
}

inline SweepRow run_point(const ExperimentConfig& cfg, SweepKind kind, double parameter) {
  SweepRow row;
  row.parameter = parameter;
  row.config_hash = config_hash(cfg);
  const AsymptoticParams p = cfg.params();

  DecoherenceReport rep = lambda_decomposition(p);
  rep.validate();
  fill_report(row, rep);

  switch (kind) {
    case SweepKind::single_run: {
      double worst = 0.0;
      for (const auto& [key, err] : rep.norm_errors) worst = std::max(worst, err);
      row.norm_error = worst;
      break;
    }
    case SweepKind::d_decay:
      row.norm_error = row.overlap_abs;
      break;
    case SweepKind::dq0_decay:
    case SweepKind::sigma_alpha_decay: {
      const AsymptoticFields F(p);
      const Prop2Audit audit = audit_prop2(F, cfg.grid_R, cfg.grid_r, 1);
      row.norm_error = audit.l2_diff;
      row.zeta1 = audit.l2_z1;
      row.zeta2 = audit.l2_z2;
      row.zeta3 = audit.l2_z3;
      row.bound_zeta1 = audit.bound_z1;
      row.bound_zeta23 = audit.bound_z23;
      break;
    }
    case SweepKind::epsilon_rate: {
      const Grid gy = relative_grid(cfg.grid_r, cfg.grid_R);
      ExactEvolver ev(p, cfg.grid_R, gy, 1);
      ev.boundary_threshold = cfg.boundary_threshold;
      RunManifest manifest;
      const Field2D psi = ev.evolve(cfg.tau, &manifest);
      row.boundary_mass = manifest.boundary_mass_max;
      const AsymptoticFields F(p);
      row.norm_error = cm_distance(psi, F, ClosedForm::scattering_asymptotic, 1);
      break;
    }
  }
  return row;
}

inline void classify_failure(SweepRow& row, const std::exception& e, const char* status) {
  row.status = status;
  std::string msg = e.what();
  for (char& ch : msg)
    if (ch == ',' || ch == '\n') ch = ';';
  row.message = msg;
}

} // namespace detail

inline void validate(const SweepSpec& spec) {
  if (spec.kind == SweepKind::single_run) {
    if (!spec.ladder.empty())
      throw config_error("sweep: single_run takes no ladder");
    return;
  }
  if (spec.ladder.size() < 3)
    throw config_error("sweep: rate estimation needs a ladder of at least 3 values");
  const bool inc = spec.ladder[1] > spec.ladder[0];
  for (std::size_t i = 1; i < spec.ladder.size(); ++i) {
    const bool step_inc = spec.ladder[i] > spec.ladder[i - 1];
    if (spec.ladder[i] == spec.ladder[i - 1] || step_inc != inc)
      throw config_error("sweep: ladder must be strictly monotone");
  }
}

inline std::string sweep_csv_text(const SweepResult& res) {
  std::string out;
  char buf[512];
  out += "# dclab sweep csv v1\n";
  out += std::string("# kind = ") + to_string(res.kind) + "\n";
  out += "parameter,status,lambda_re,lambda_im,lambda_abs,transmission_probability,"
         "overlap_abs,bound_I,tail,norm_error,zeta1,zeta2,zeta3,bound_zeta1,"
         "bound_zeta23,boundary_mass,config_hash,message\n";
  for (const SweepRow& r : res.rows) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%s,%s\n",
                  r.parameter, r.status.c_str(), r.lambda.real(), r.lambda.imag(),
                  std::abs(r.lambda), r.transmission_probability, r.overlap_abs, r.bound_I,
                  r.tail, r.norm_error, r.zeta1, r.zeta2, r.zeta3, r.bound_zeta1,
                  r.bound_zeta23, r.boundary_mass, r.config_hash.c_str(), r.message.c_str());
    out += buf;
  }
  if (res.fitted_rate) {
    std::snprintf(buf, sizeof buf, "# fitted_rate = %.17g\n", *res.fitted_rate);
    out += buf;
  }
  return out;
}

// Execute the ladder.  Derived configs are validated up front (an invalid
// one aborts before any computation); per-point runtime failures are
// recorded in their row and the sweep continues.  Points run concurrently up
// to `workers`, each fully isolated; rows merge in ladder order.
inline SweepResult run_sweep(const SweepSpec& spec, std::size_t workers = 1) {
  validate(spec);
  std::vector<double> params = spec.ladder;
  if (spec.kind == SweepKind::single_run) params = {0.0};

  std::vector<ExperimentConfig> configs;
  configs.reserve(params.size());
  for (double v : params) configs.push_back(detail::at_parameter(spec.base, spec.kind, v));

  std::filesystem::create_directories(spec.out_dir);

  SweepResult res;
  res.kind = spec.kind;
  res.rows.resize(params.size());
  std::vector<double> walls(params.size(), 0.0);

  const auto run_one = [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepRow row;
    row.parameter = params[i];
    row.config_hash = config_hash(configs[i]);
    try {
      row = detail::run_point(configs[i], spec.kind, params[i]);
    } catch (const invariant_violation& e) {
      detail::classify_failure(row, e, "invariant_violation");
    } catch (const numerical_guard& e) {
      detail::classify_failure(row, e, "numerical_guard");
    } catch (const config_error& e) {
      detail::classify_failure(row, e, "config_error");
    }
    const auto t1 = std::chrono::steady_clock::now();
    walls[i] =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0).count();
    res.rows[i] = row;
  };

  const std::size_t w = std::min(workers ? workers : 1, params.size());
  if (w <= 1) {
    for (std::size_t i = 0; i < params.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < params.size(); i = next.fetch_add(1))
          run_one(i);
      });
    for (std::thread& th : pool) th.join();
  }

  for (std::size_t i = 0; i < params.size(); ++i)
    detail::write_point_manifest(spec.out_dir, i, configs[i], res.rows[i], walls[i]);

  // least-squares slope of log(error) vs log(parameter); meaningful only for
  // ladders, and only over points that produced a positive error
  if (spec.kind != SweepKind::single_run) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (const SweepRow& r : res.rows) {
      if (!r.ok() || !(r.norm_error > 0.0) || !(r.parameter > 0.0)) continue;
      const double x = std::log(r.parameter), y = std::log(r.norm_error);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (m >= 3) {
      const double denom = double(m) * sxx - sx * sx;
      if (denom > 0.0) res.fitted_rate = (double(m) * sxy - sx * sy) / denom;
    }
  }

  const std::string csv_path = spec.out_dir + "/sweep.csv";
  std::ofstream out(csv_path);
  if (!out) throw config_error("sweep: cannot open " + csv_path);
  out << sweep_csv_text(res);
  if (!out) throw config_error("sweep: I/O failure on " + csv_path);
  return res;
}

enum class PlotStyle { loglog, linear };

// Two-column (parameter, value) files per tracked quantity, plus a gnuplot
// stub; data are always raw values, log scaling is a plotting directive.
inline std::vector<std::string> emit_plot_data(const SweepResult& res, PlotStyle style,
                                               const std::string& out_dir) {
  std::size_t ok_rows = 0;
  for (const SweepRow& r : res.rows) ok_rows += r.ok();
  if (ok_rows == 0) throw config_error("plot data: sweep result holds no successful rows");
  std::filesystem::create_directories(out_dir);

  const char* kind = to_string(res.kind);
  struct Quantity {
    const char* name;
    double (*get)(const SweepRow&);
  };
  static const Quantity quantities[] = {
      {"norm_error", [](const SweepRow& r) { return r.norm_error; }},
      {"lambda_abs", [](const SweepRow& r) { return std::abs(r.lambda); }},
      {"transmission_probability", [](const SweepRow& r) { return r.transmission_probability; }},
      {"overlap_abs", [](const SweepRow& r) { return r.overlap_abs; }},
      {"bound_I", [](const SweepRow& r) { return r.bound_I; }},
      {"tail", [](const SweepRow& r) { return r.tail; }},
  };

  std::vector<std::string> written;
  char buf[96];
  for (const Quantity& q : quantities) {
    const std::string path = out_dir + "/" + kind + "_" + q.name + ".dat";
    std::ofstream out(path);
    if (!out) throw config_error("plot data: cannot open " + path);
    for (const SweepRow& r : res.rows) {
      if (!r.ok()) continue;
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", r.parameter, q.get(r));
      out << buf;
    }
    if (!out) throw config_error("plot data: I/O failure on " + path);
    written.push_back(path);
  }

  const std::string script = out_dir + "/" + kind + ".gp";
  std::ofstream gp(script);
  if (!gp) throw config_error("plot data: cannot open " + script);
  gp << "# gnuplot stub for the " << kind << " sweep\n";
  if (style == PlotStyle::loglog) gp << "set logscale xy\n";
  gp << "set xlabel 'parameter'\nset ylabel 'value'\n";
  gp << "plot '" << kind << "_norm_error.dat' with linespoints title 'norm error'";
  if (res.kind == SweepKind::d_decay)
    gp << ", \\\n     '" << kind << "_bound_I.dat' with lines title 'bound'";
  gp << "\n";
  if (!gp) throw config_error("plot data: I/O failure on " + script);
  written.push_back(script);
  return written;
}

} // namespace dcl
