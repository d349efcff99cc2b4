// dclab: experiment driver for the heavy-light scattering laboratory.
//
//   dclab run   [--config <path>] [--out <dir>]
//   dclab sweep  --sweep <kind> --ladder <v1,v2,...> --out <dir>
//                [--config <path>] [--workers <n>]
//   dclab check [--config <path>] [--seed <int>]
//   dclab dump   --out <dir> [--config <path>]
//
// Exit codes: 0 ok, 2 config invalid, 3 invariant violation, 4 numerical
// guard tripped.

#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "dcl/decoherence.hpp"
#include "dcl/errors.hpp"
#include "dcl/exact_evolution.hpp"
#include "dcl/experiment.hpp"
#include "dcl/scattering.hpp"
#include "dcl/serialize.hpp"
#include "dcl/sweep.hpp"

namespace {

struct CliArgs {
  std::string verb;
  std::string config_path;
  std::string sweep_kind;
  std::string ladder;
  std::string out_dir;
  std::size_t workers = 1;
  unsigned seed = 1u;
};

void usage(std::FILE* to) {
  std::fputs(
      "usage: dclab <run|sweep|check|dump> [flags]\n"
      "  --config <path>   experiment config file (default: built-in reference regime)\n"
      "  --sweep <kind>    epsilon_rate | dq0_decay | sigma_alpha_decay | d_decay | single_run\n"
      "  --ladder <list>   comma-separated parameter values, strictly monotone\n"
      "  --out <dir>       output directory (required for sweep and dump)\n"
      "  --workers <n>     concurrent ladder points (default 1)\n"
      "  --seed <int>      seed for the randomized checks (check verb only)\n"
      "exit codes: 0 ok, 2 config invalid, 3 invariant violation, 4 numerical guard\n",
      to);
}

CliArgs parse_args(int argc, char** argv) {
  if (argc < 2) throw dcl::config_error("missing verb");
  CliArgs a;
  a.verb = argv[1];
  if (a.verb != "run" && a.verb != "sweep" && a.verb != "check" && a.verb != "dump")
    throw dcl::config_error("unknown verb '" + a.verb + "'");
  for (int i = 2; i < argc; ++i) {
    const std::string flag = argv[i];
    const auto value = [&]() -> std::string {
      if (i + 1 >= argc) throw dcl::config_error("flag " + flag + " needs a value");
      return argv[++i];
    };
    if (flag == "--config") {
      a.config_path = value();
    } else if (flag == "--sweep") {
      a.sweep_kind = value();
    } else if (flag == "--ladder") {
      a.ladder = value();
    } else if (flag == "--out") {
      a.out_dir = value();
    } else if (flag == "--workers") {
      const std::string v = value();
      std::size_t n = 0;
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc() || p != v.data() + v.size() || n == 0)
        throw dcl::config_error("--workers needs a positive integer, got " + v);
      a.workers = n;
    } else if (flag == "--seed") {
      const std::string v = value();
      unsigned n = 0;
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc() || p != v.data() + v.size())
        throw dcl::config_error("--seed needs a nonnegative integer, got " + v);
      a.seed = n;
    } else {
      throw dcl::config_error("unknown flag '" + flag + "'");
    }
  }
  return a;
}

std::vector<double> parse_ladder(const std::string& s) {
  if (s.empty()) return {};
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::string token =
        s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || p != token.data() + token.size())
      throw dcl::config_error("--ladder entry is not a number: '" + token + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

dcl::ExperimentConfig load(const CliArgs& a) {
  return a.config_path.empty() ? dcl::default_config() : dcl::load_config(a.config_path);
}

int cmd_run(const CliArgs& a) {
  const dcl::ExperimentConfig cfg = load(a);
  const dcl::DecoherenceReport rep = dcl::lambda_decomposition(cfg.params());
  rep.validate();
  const std::string text =
      "config_hash = " + dcl::config_hash(cfg) + "\n" + rep.format();
  std::fputs(text.c_str(), stdout);
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    const std::string path = a.out_dir + "/report.txt";
    std::ofstream out(path);
    if (!out) throw dcl::config_error("run: cannot open " + path);
    out << text;
    if (!out) throw dcl::config_error("run: I/O failure on " + path);
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_sweep(const CliArgs& a) {
  if (a.sweep_kind.empty()) throw dcl::config_error("sweep: --sweep <kind> is required");
  if (a.out_dir.empty()) throw dcl::config_error("sweep: --out <dir> is required");
  dcl::SweepSpec spec;
  spec.kind = dcl::parse_sweep_kind(a.sweep_kind);
  spec.base = load(a);
  spec.ladder = parse_ladder(a.ladder);
  spec.out_dir = a.out_dir;
  const dcl::SweepResult res = dcl::run_sweep(spec, a.workers);
  dcl::emit_plot_data(res, dcl::PlotStyle::loglog, a.out_dir);

  std::size_t ok = 0;
  for (const auto& row : res.rows) ok += row.ok();
  std::printf("sweep %s: %zu/%zu points ok\n", dcl::to_string(res.kind), ok, res.rows.size());
  for (const auto& row : res.rows)
    if (!row.ok())
      std::printf("  point %.17g failed (%s): %s\n", row.parameter, row.status.c_str(),
                  row.message.c_str());
  if (res.fitted_rate) std::printf("fitted_rate = %.6g\n", *res.fitted_rate);
  std::printf("wrote %s/sweep.csv\n", a.out_dir.c_str());

  for (const auto& row : res.rows) {
    if (row.status == "invariant_violation") return 3;
  }
  for (const auto& row : res.rows) {
    if (row.status == "numerical_guard") return 4;
  }
  for (const auto& row : res.rows) {
    if (!row.ok()) return 2;
  }
  return 0;
}

int cmd_check(const CliArgs& a) {
  const dcl::ExperimentConfig cfg = load(a);
  std::printf("check: config valid (hash %s)\n", dcl::config_hash(cfg).c_str());

  // sampled packets are unit vectors, and stay unit under the transform; the
  // sampling itself can only miss the envelope mass past the lattice band
  {
    const dcl::Field light = cfg.params().light.sample(cfg.grid_r);
    const double nl = dcl::norm2(light);
    const double band = std::max(cfg.grid_r.kmax() - std::abs(cfg.q0), 0.0) * cfg.delta;
    const double budget = 1e-12 + 10.0 * dcl::bump().ft_tail2(band);
    if (std::abs(nl - 1.0) > budget)
      throw dcl::invariant_violation("check: light packet norm deviates by " +
                                     std::to_string(nl - 1.0));
    const std::vector<dcl::cplx> spec = dcl::forward_ft(light);
    double ms = 0.0;
    for (const dcl::cplx& v : spec) ms += std::norm(v);
    ms *= cfg.grid_r.dk();
    if (std::abs(ms - nl) > 1e-10)
      throw dcl::invariant_violation("check: transform norm deviates by " +
                                     std::to_string(ms - nl));
    std::printf("check: packet norms ok\n");
  }

  // scattering amplitude identities on a seeded random sample
  {
    std::mt19937 rng(a.seed);
    std::uniform_real_distribution<double> ua(0.01, 50.0), uk(0.01, 50.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const dcl::DeltaAmplitudes amps(ua(rng));
      const double k = uk(rng);
      const dcl::cplx R = amps.refl(k), T = amps.trans(k);
      worst = std::max(worst, std::abs(std::norm(R) + std::norm(T) - 1.0));
      worst = std::max(worst, std::abs(1.0 + R - T));
    }
    if (worst > 1e-13)
      throw dcl::invariant_violation("check: scattering identities deviate by " +
                                     std::to_string(worst));
    std::printf("check: scattering identities ok (worst %.3g)\n", worst);
  }

  // the coherence-weight decomposition and its internal bounds
  {
    const dcl::DecoherenceReport rep = dcl::lambda_decomposition(cfg.params());
    rep.validate();
    std::printf("check: coherence decomposition ok (|lambda| = %.6f)\n",
                std::abs(rep.lambda));
  }
  std::printf("check: all suites passed\n");
  return 0;
}

int cmd_dump(const CliArgs& a) {
  if (a.out_dir.empty()) throw dcl::config_error("dump: --out <dir> is required");
  const dcl::ExperimentConfig cfg = load(a);
  std::filesystem::create_directories(a.out_dir);
  const dcl::AsymptoticParams p = cfg.params();
  const dcl::AsymptoticFields F(p);

  const auto save = [&](const char* name, const dcl::Field& f) {
    const std::string base = a.out_dir + "/" + name;
    dcl::write_field(base + ".bin", f);
    dcl::write_field_csv(base + ".csv", f);
    std::printf("wrote %s.bin, %s.csv\n", base.c_str(), base.c_str());
  };

  save("light_packet", p.light.sample(cfg.grid_r));
  save("heavy_plus", p.heavy.plus().sample(cfg.grid_R));
  save("heavy_minus", p.heavy.minus().sample(cfg.grid_R));

  dcl::Field trans = dcl::make_field(cfg.grid_r), refl_p = dcl::make_field(cfg.grid_r),
             refl_m = dcl::make_field(cfg.grid_r);
  for (std::size_t i = 0; i < cfg.grid_r.n; ++i) {
    const double r = cfg.grid_r.x(i);
    trans.a[i] = F.channel_trans(r);
    refl_p.a[i] = F.channel_refl(r, -p.heavy.R0);
    refl_m.a[i] = F.channel_refl(r, +p.heavy.R0);
  }
  save("channel_trans", trans);
  save("channel_refl_plus", refl_p);
  save("channel_refl_minus", refl_m);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  try {
    const CliArgs a = parse_args(argc, argv);
    if (a.verb == "run") return cmd_run(a);
    if (a.verb == "sweep") return cmd_sweep(a);
    if (a.verb == "check") return cmd_check(a);
    return cmd_dump(a);
  } catch (const dcl::invariant_violation& e) {
    std::fprintf(stderr, "dclab: %s\n", e.what());
    return 3;
  } catch (const dcl::numerical_guard& e) {
    std::fprintf(stderr, "dclab: %s\n", e.what());
    return 4;
  } catch (const dcl::config_error& e) {
    std::fprintf(stderr, "dclab: %s\n", e.what());
    usage(stderr);
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dclab: %s\n", e.what());
    return 1;
  }
}
