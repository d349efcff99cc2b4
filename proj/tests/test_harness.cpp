#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "dcl/serialize.hpp"
#include "dcl/sweep.hpp"

using namespace dcl;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

// a deliberately crude regime: every functional is cheap to evaluate, all
// invariants still hold
std::string compact_text(const char* alpha = "0.5", const char* extra = "") {
  return std::string("# compact regime for harness tests\n"
                     "epsilon = 0.1\n"
                     "alpha = ") +
         alpha +
         "\n"
         "q0 = 1\n"
         "delta = 2\n"
         "sigma = 1\n"
         "R0 = 2.5\n"
         "P0 = 0.5\n"
         "tau = 0.25\n" +
         extra;
}

ExperimentConfig compact_config(const char* alpha = "0.5", const char* extra = "") {
  return parse_config_text(compact_text(alpha, extra));
}

fs::path fresh_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += (c == '\n');
  return n;
}

bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

TEST_CASE("config text parses, derives placement, and is idempotent", "[harness][config]") {
  ExperimentConfig c = compact_config();
  CHECK(c.epsilon == 0.1);
  CHECK(c.alpha == 0.5);
  CHECK(c.q0 == 1.0);
  CHECK(c.delta == 2.0);
  CHECK(c.sigma == 1.0);
  CHECK(c.R0 == 2.5);
  CHECK(c.P0 == 0.5);
  CHECK(c.tau == 0.25);

  SECTION("launch point sits one unit left of the full support") {
    CHECK(c.r0 == -(c.R0 + c.sigma + c.delta + 1.0));
    CHECK(c.r0_auto);
  }

  SECTION("derived lattices are pow2, cover the flight, and resolve the spectrum") {
    CHECK(is_pow2(c.grid_r.n));
    CHECK(is_pow2(c.grid_R.n));
    const double drift = c.q0 * c.tau / c.epsilon;
    CHECK(c.grid_r.xmin <= c.r0 - c.delta - drift);
    CHECK(c.grid_r.xmax >= c.r0 + c.delta + drift);
    CHECK(c.grid_R.xmin <= -c.R0 - c.sigma - c.P0 * c.tau);
    CHECK(c.grid_R.xmax >= c.R0 + c.sigma + c.P0 * c.tau);
    CHECK(c.grid_r.kmax() >= 4.0 * (c.q0 + 3.0 / c.delta));
    CHECK(c.grid_R.kmax() >= 4.0 * (c.P0 + 3.0 / c.sigma));
  }

  SECTION("finalize is idempotent") {
    ExperimentConfig d = c;
    finalize(d);
    CHECK(d.r0 == c.r0);
    CHECK(d.grid_r.xmin == c.grid_r.xmin);
    CHECK(d.grid_r.n == c.grid_r.n);
    CHECK(d.grid_R.xmax == c.grid_R.xmax);
    CHECK(d.grid_R.n == c.grid_R.n);
  }

  SECTION("the shipped reference regime derives the validated lattices") {
    const ExperimentConfig r = default_config();
    CHECK(r.grid_r.n == 4096);
    CHECK(r.grid_R.n == 65536);
    CHECK(r.r0 == Approx(-81.01).margin(1e-12));
    CHECK_NOTHROW(validate(r));
  }

  SECTION("comments, spacing, and key order do not change the result") {
    const ExperimentConfig d = parse_config_text(
        "tau=0.25\nP0 = 0.5   # drift\n\nR0 =2.5\nsigma= 1\ndelta = 2\n"
        "# reordered on purpose\nq0 = 1\nalpha = 0.5\nepsilon = 0.1\n");
    CHECK(canonical_text(d) == canonical_text(c));
    CHECK(config_hash(d) == config_hash(c));
  }

  SECTION("explicit placement keys switch off the derivations") {
    const ExperimentConfig d = parse_config_text(compact_text(
        "0.5",
        "r0 = -9\ngrid_r_half = 16\ngrid_r_n = 256\ngrid_R_half = 8\ngrid_R_n = 128\n"));
    CHECK_FALSE(d.r0_auto);
    CHECK_FALSE(d.grids_auto);
    CHECK(d.r0 == -9.0);
    CHECK(d.grid_r.xmin == -16.0);
    CHECK(d.grid_r.n == 256);
    CHECK(d.grid_R.xmax == 8.0);
    CHECK(d.grid_R.n == 128);
  }
}

TEST_CASE("config text rejects malformed input with the offending line", "[harness][config]") {
  CHECK_THROWS_AS(parse_config_text("epsilon 0.1\n"), config_error);
  CHECK_THROWS_WITH(parse_config_text("# fine\n\nepsilon 0.1\n"),
                    Catch::Matchers::ContainsSubstring("line 3"));
  CHECK_THROWS_WITH(parse_config_text("= 0.1\n"),
                    Catch::Matchers::ContainsSubstring("missing a key"));
  CHECK_THROWS_WITH(parse_config_text(compact_text("0.5", "alpha = 1\n")),
                    Catch::Matchers::ContainsSubstring("duplicate key 'alpha'"));
  CHECK_THROWS_WITH(parse_config_text(compact_text("0.5", "spin = 1\n")),
                    Catch::Matchers::ContainsSubstring("unknown key 'spin'"));
  CHECK_THROWS_WITH(parse_config_text("epsilon = 0.1\nalpha = 1\n"),
                    Catch::Matchers::ContainsSubstring("missing key"));
  CHECK_THROWS_WITH(parse_config_text(compact_text("0.5", "tau = banana\n")),
                    Catch::Matchers::ContainsSubstring("duplicate"));
  CHECK_THROWS_WITH(parse_config_text(compact_text("banana")),
                    Catch::Matchers::ContainsSubstring("not a number"));
  CHECK_THROWS_WITH(parse_config_text(compact_text("0.5", "grid_r_half = 16\n")),
                    Catch::Matchers::ContainsSubstring("all together"));
  CHECK_THROWS_WITH(
      parse_config_text(compact_text(
          "0.5", "grid_r_half = 16\ngrid_r_n = 250\ngrid_R_half = 8\ngrid_R_n = 128\n")),
      Catch::Matchers::ContainsSubstring("power of two"));
  CHECK_THROWS_AS(load_config("/nonexistent/dcl_harness.cfg"), config_error);
}

TEST_CASE("every support condition has a rejecting direction", "[harness][config]") {
  const ExperimentConfig base = compact_config();

  const auto rejects = [&](void (*mutate)(ExperimentConfig&), const char* what) {
    ExperimentConfig c = base;
    mutate(c);
    CHECK_THROWS_WITH(validate(c), Catch::Matchers::ContainsSubstring(what));
  };

  rejects([](ExperimentConfig& c) { c.sigma = 0.0; }, "sigma");
  rejects([](ExperimentConfig& c) { c.R0 = -1.0; }, "R0");
  rejects([](ExperimentConfig& c) { c.P0 = 0.0; }, "P0");
  rejects([](ExperimentConfig& c) { c.delta = 0.0; }, "delta");
  rejects([](ExperimentConfig& c) { c.q0 = 0.0; }, "q0");
  rejects([](ExperimentConfig& c) { c.R0 = 2.0 * c.sigma; }, "2*sigma");
  rejects([](ExperimentConfig& c) { c.r0 = -c.R0 - c.sigma - c.delta; }, "r0");
  rejects([](ExperimentConfig& c) { c.epsilon = 0.0; }, "epsilon");
  rejects([](ExperimentConfig& c) { c.epsilon = 1.0; }, "epsilon");
  rejects([](ExperimentConfig& c) { c.alpha = -0.1; }, "alpha");
  rejects([](ExperimentConfig& c) { c.tau = 0.0; }, "tau");
  rejects([](ExperimentConfig& c) { c.boundary_threshold = 0.0; }, "boundary_threshold");
  rejects([](ExperimentConfig& c) { c.grid_r = make_grid(-4.0, 4.0, 64); }, "grid_r");
  rejects([](ExperimentConfig& c) { c.grid_R = make_grid(-2.0, 2.0, 64); }, "grid_R");

  SECTION("the free particle is a valid boundary case") {
    ExperimentConfig c = base;
    c.alpha = 0.0;
    CHECK_NOTHROW(validate(c));
  }

  SECTION("a barely sufficient launch point passes") {
    ExperimentConfig c = base;
    c.r0_auto = false;
    c.r0 = -c.R0 - c.sigma - c.delta - 1e-6;
    c.grids_auto = true;
    CHECK_NOTHROW(finalize(c));
  }
}

TEST_CASE("config hashes are stable, well formed, and sensitive", "[harness][config]") {
  const ExperimentConfig a = compact_config();
  const ExperimentConfig b = compact_config();

  SECTION("independent parses agree") {
    CHECK(config_hash(a) == config_hash(b));
    CHECK(canonical_text(a) == canonical_text(b));
  }

  SECTION("sixteen lowercase hex digits") {
    const std::string h = config_hash(a);
    REQUIRE(h.size() == 16);
    for (char c : h) CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));
  }

  SECTION("each physical knob moves the hash") {
    std::set<std::string> seen{config_hash(a)};
    const auto probe = [&](void (*mutate)(ExperimentConfig&)) {
      ExperimentConfig c = a;
      mutate(c);
      seen.insert(config_hash(c));
    };
    probe([](ExperimentConfig& c) { c.epsilon = 0.2; });
    probe([](ExperimentConfig& c) { c.alpha = 0.75; });
    probe([](ExperimentConfig& c) { c.sigma = 1.25; });
    probe([](ExperimentConfig& c) { c.R0 = 3.0; });
    probe([](ExperimentConfig& c) { c.P0 = 0.75; });
    probe([](ExperimentConfig& c) { c.delta = 2.5; });
    probe([](ExperimentConfig& c) { c.q0 = 1.5; });
    probe([](ExperimentConfig& c) { c.tau = 0.5; });
    probe([](ExperimentConfig& c) { c.boundary_threshold = 1e-6; });
    CHECK(seen.size() == 10);
  }

  SECTION("canonical text lists every effective value exactly once") {
    const std::string text = canonical_text(a);
    for (const char* key : {"epsilon", "alpha", "sigma", "R0", "P0", "delta", "q0", "r0",
                            "tau", "boundary_threshold", "grid_r_half", "grid_r_n",
                            "grid_R_half", "grid_R_n"}) {
      const std::string needle = std::string(key) + " = ";
      const std::size_t first = text.find("\n" + needle);
      const bool at_start = text.rfind(needle, 0) == 0;
      CHECK((first != std::string::npos || at_start));
      if (first != std::string::npos)
        CHECK(text.find("\n" + needle, first + 1) == std::string::npos);
    }
  }
}

TEST_CASE("field snapshots round-trip through the binary format", "[harness][serialize]") {
  const fs::path dir = fresh_dir("dcl_harness_io");
  fs::create_directories(dir);
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  Field f{make_grid(-3.0, 5.0, 64), {}};
  f.a.resize(64);
  for (cplx& z : f.a) z = cplx(u(rng), u(rng));
  const std::string p1 = (dir / "line.bin").string();
  write_field(p1, f);

  SECTION("header bytes follow the published layout") {
    const std::string raw = slurp(p1);
    REQUIRE(raw.size() == 64 + 64 * sizeof(cplx));
    CHECK(raw.compare(0, 4, "DCL1") == 0);
    std::uint32_t version = 0;
    std::memcpy(&version, raw.data() + 4, 4);
    CHECK(version == 1u);
    double x_lo = 0.0, x_hi = 0.0;
    std::uint64_t nx = 0, ny = 0;
    std::memcpy(&x_lo, raw.data() + 8, 8);
    std::memcpy(&x_hi, raw.data() + 16, 8);
    std::memcpy(&nx, raw.data() + 24, 8);
    std::memcpy(&ny, raw.data() + 48, 8);
    CHECK(x_lo == -3.0);
    CHECK(x_hi == 5.0);
    CHECK(nx == 64u);
    CHECK(ny == 0u);

    double re0 = 0.0, im0 = 0.0;
    std::memcpy(&re0, raw.data() + 64, 8);
    std::memcpy(&im0, raw.data() + 72, 8);
    CHECK(re0 == f.a[0].real());
    CHECK(im0 == f.a[0].imag());
  }

  SECTION("1d payload returns bit-identical") {
    const Field g = read_field_1d(p1);
    CHECK(g.grid.xmin == f.grid.xmin);
    CHECK(g.grid.xmax == f.grid.xmax);
    REQUIRE(g.grid.n == f.grid.n);
    CHECK(std::memcmp(g.a.data(), f.a.data(), f.a.size() * sizeof(cplx)) == 0);
  }

  SECTION("2d payload returns bit-identical") {
    Field2D t = make_field2d(make_grid(-2.0, 2.0, 8), make_grid(-4.0, 4.0, 16));
    for (cplx& z : t.a) z = cplx(u(rng), u(rng));
    const std::string p2 = (dir / "sheet.bin").string();
    write_field(p2, t);

    const std::string raw = slurp(p2);
    REQUIRE(raw.size() == 64 + t.a.size() * sizeof(cplx));
    std::uint64_t ny = 0;
    double y_lo = 0.0, y_hi = 0.0;
    std::memcpy(&y_lo, raw.data() + 32, 8);
    std::memcpy(&y_hi, raw.data() + 40, 8);
    std::memcpy(&ny, raw.data() + 48, 8);
    CHECK(y_lo == -4.0);
    CHECK(y_hi == 4.0);
    CHECK(ny == 16u);

    const Field2D s = read_field_2d(p2);
    CHECK(s.gx.xmin == t.gx.xmin);
    CHECK(s.gy.xmax == t.gy.xmax);
    REQUIRE(s.a.size() == t.a.size());
    CHECK(std::memcmp(s.a.data(), t.a.data(), t.a.size() * sizeof(cplx)) == 0);

    CHECK_THROWS_AS(read_field_1d(p2), config_error);
  }

  SECTION("dimension mismatch and damage are rejected") {
    CHECK_THROWS_AS(read_field_2d(p1), config_error);

    const fs::path cut = dir / "cut.bin";
    fs::copy_file(p1, cut, fs::copy_options::overwrite_existing);
    fs::resize_file(cut, 500);
    CHECK_THROWS_AS(read_field_1d(cut.string()), config_error);
    fs::resize_file(cut, 32);
    CHECK_THROWS_AS(read_field_1d(cut.string()), config_error);

    std::string raw = slurp(p1);
    raw[0] = 'X';
    const fs::path bad = dir / "bad.bin";
    spill(bad, raw);
    CHECK_THROWS_AS(read_field_1d(bad.string()), config_error);

    CHECK_THROWS_AS(read_field_1d((dir / "absent.bin").string()), config_error);
  }

  SECTION("csv export is headed and row-per-sample") {
    const fs::path pc = dir / "line.csv";
    write_field_csv(pc.string(), f);
    const std::string text = slurp(pc);
    REQUIRE(count_lines(text) == 1 + f.grid.n);
    CHECK(text.rfind("x,re,im\n", 0) == 0);

    // spot check one row: %.17g columns reparse to the exact doubles
    std::istringstream rows(text);
    std::string line;
    for (int i = 0; i < 5; ++i) std::getline(rows, line);
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream cols(line);
    double x = 0.0, re = 0.0, im = 0.0;
    cols >> x >> re >> im;
    CHECK(x == f.grid.x(3));
    CHECK(re == f.a[3].real());
    CHECK(im == f.a[3].imag());
  }
}

TEST_CASE("sweep specs are vetted before any computation", "[harness][sweep]") {
  SweepSpec spec;
  spec.base = compact_config();

  SECTION("a lone run takes no ladder") {
    spec.kind = SweepKind::single_run;
    spec.ladder = {1.0};
    CHECK_THROWS_AS(validate(spec), config_error);
  }

  SECTION("rate ladders need three strictly monotone rungs") {
    spec.kind = SweepKind::dq0_decay;
    spec.ladder = {2.0, 4.0};
    CHECK_THROWS_AS(validate(spec), config_error);
    spec.ladder = {2.0, 4.0, 4.0};
    CHECK_THROWS_AS(validate(spec), config_error);
    spec.ladder = {2.0, 8.0, 4.0};
    CHECK_THROWS_AS(validate(spec), config_error);
    spec.ladder = {8.0, 4.0, 2.0};
    CHECK_NOTHROW(validate(spec));
    spec.ladder = {2.0, 4.0, 8.0};
    CHECK_NOTHROW(validate(spec));
  }

  SECTION("one bad rung aborts the whole ladder up front") {
    spec.kind = SweepKind::d_decay;
    spec.ladder = {2.0, 4.0, 8.0}; // first rung collapses the branch separation
    spec.out_dir = fresh_dir("dcl_harness_abort").string();
    CHECK_THROWS_WITH(run_sweep(spec), Catch::Matchers::ContainsSubstring("2*sigma"));
    CHECK_FALSE(fs::exists(spec.out_dir));

    spec.kind = SweepKind::epsilon_rate;
    spec.ladder = {2.0, 1.0, 0.5}; // mass ratios at and above one
    CHECK_THROWS_WITH(run_sweep(spec), Catch::Matchers::ContainsSubstring("epsilon"));
    CHECK_FALSE(fs::exists(spec.out_dir));
  }

  SECTION("the separation ladder needs a coupling to scale against") {
    spec.kind = SweepKind::d_decay;
    spec.base = compact_config("0");
    spec.ladder = {3.0, 6.0, 12.0};
    spec.out_dir = fresh_dir("dcl_harness_abort").string();
    CHECK_THROWS_AS(run_sweep(spec), config_error);
  }

  SECTION("unknown kind names are rejected, known ones round-trip") {
    CHECK_THROWS_AS(parse_sweep_kind("exponential"), config_error);
    for (SweepKind k : {SweepKind::epsilon_rate, SweepKind::dq0_decay,
                        SweepKind::sigma_alpha_decay, SweepKind::d_decay,
                        SweepKind::single_run})
      CHECK(parse_sweep_kind(to_string(k)) == k);
  }
}

TEST_CASE("a lone free-particle run reports perfect coherence", "[harness][sweep]") {
  SweepSpec spec;
  spec.kind = SweepKind::single_run;
  spec.base = compact_config("0");
  spec.out_dir = fresh_dir("dcl_harness_single").string();

  const SweepResult res = run_sweep(spec);
  REQUIRE(res.rows.size() == 1);
  const SweepRow& r = res.rows[0];
  CHECK(r.ok());
  CHECK(std::abs(r.lambda - 1.0) < 1e-12);
  CHECK(std::abs(r.transmission_probability - 1.0) < 1e-12);
  CHECK(r.overlap_abs == 0.0);
  CHECK(r.norm_error < 1e-10);
  CHECK_FALSE(res.fitted_rate.has_value());

  const std::string csv = slurp(fs::path(spec.out_dir) / "sweep.csv");
  CHECK(csv.rfind("# dclab sweep csv v1\n", 0) == 0);
  CHECK(csv.find("# kind = single_run\n") != std::string::npos);
  CHECK(csv.find("fitted_rate") == std::string::npos);
  CHECK(csv.find("timestamp") == std::string::npos);

  const std::string manifest = slurp(fs::path(spec.out_dir) / "point_000.manifest");
  CHECK(manifest.find("status = ok") != std::string::npos);
  CHECK(manifest.find("timestamp = ") != std::string::npos);
  CHECK(manifest.find("wall_ms = ") != std::string::npos);
  CHECK(manifest.find("alpha = 0\n") != std::string::npos);
}

TEST_CASE("the envelope ladder tracks its split error bounds", "[harness][sweep]") {
  SweepSpec spec;
  spec.kind = SweepKind::dq0_decay;
  spec.base = compact_config();
  spec.ladder = {2.0, 4.0, 8.0};
  spec.out_dir = fresh_dir("dcl_harness_dq0_a").string();

  const SweepResult res = run_sweep(spec);
  REQUIRE(res.rows.size() == 3);
  const double sa = std::sqrt(2.0) * spec.base.sigma * spec.base.alpha;
  for (const SweepRow& r : res.rows) {
    REQUIRE(r.ok());
    CHECK(r.norm_error > 0.0);
    CHECK(r.zeta1 > 0.0);
    CHECK(r.zeta2 > 0.0);
    CHECK(r.zeta3 > 0.0);
    // the pieces sum to the gap field, so the triangle inequality must hold
    CHECK(r.norm_error <= r.zeta1 + r.zeta2 + r.zeta3 + 1e-12);
    CHECK(r.zeta1 <= r.bound_zeta1 * (1.0 + 1e-12));
    CHECK(r.zeta2 <= r.bound_zeta23 * (1.0 + 1e-12));
    CHECK(r.zeta3 <= r.bound_zeta23 * (1.0 + 1e-12));
    CHECK(r.bound_zeta23 == Approx(sa).epsilon(1e-12));
    CHECK(r.config_hash.size() == 16);
  }
  CHECK(res.rows[1].zeta1 < res.rows[0].zeta1);
  CHECK(res.rows[2].zeta1 < res.rows[1].zeta1);
  CHECK(res.rows[1].bound_zeta1 < res.rows[0].bound_zeta1);
  CHECK(res.rows[2].bound_zeta1 < res.rows[1].bound_zeta1);
  CHECK(res.fitted_rate.has_value());

  SECTION("each point records its substituted parameter") {
    const std::string m1 = slurp(fs::path(spec.out_dir) / "point_001.manifest");
    CHECK(m1.find("delta = 4\n") != std::string::npos);
    CHECK(m1.find("parameter = 4\n") != std::string::npos);
    std::set<std::string> hashes;
    for (const SweepRow& r : res.rows) hashes.insert(r.config_hash);
    CHECK(hashes.size() == 3);
  }

  SECTION("reruns and worker pools reproduce the csv byte for byte") {
    SweepSpec again = spec;
    again.out_dir = fresh_dir("dcl_harness_dq0_b").string();
    run_sweep(again);
    SweepSpec pooled = spec;
    pooled.out_dir = fresh_dir("dcl_harness_dq0_c").string();
    run_sweep(pooled, 2);

    const std::string a = slurp(fs::path(spec.out_dir) / "sweep.csv");
    CHECK(a == slurp(fs::path(again.out_dir) / "sweep.csv"));
    CHECK(a == slurp(fs::path(pooled.out_dir) / "sweep.csv"));

    // two comments, column header, three data rows, fitted-rate trailer
    REQUIRE(count_lines(a) == 7);
    std::istringstream rows(a);
    std::string line;
    std::size_t data_rows = 0;
    while (std::getline(rows, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("parameter,", 0) == 0) continue;
      ++data_rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 17);
    }
    CHECK(data_rows == 3);
  }

  SECTION("plot emission writes one line per successful point") {
    const fs::path pd = fresh_dir("dcl_harness_plot");
    fs::create_directories(pd);
    const std::vector<std::string> written = emit_plot_data(res, PlotStyle::loglog, pd.string());
    REQUIRE(written.size() == 7);
    for (const std::string& p : written) CHECK(fs::exists(p));
    CHECK(count_lines(slurp(pd / "dq0_decay_norm_error.dat")) == 3);
    CHECK(count_lines(slurp(pd / "dq0_decay_bound_I.dat")) == 3);
    CHECK(slurp(pd / "dq0_decay.gp").find("set logscale xy") != std::string::npos);

    emit_plot_data(res, PlotStyle::linear, pd.string());
    CHECK(slurp(pd / "dq0_decay.gp").find("logscale") == std::string::npos);
  }
}

TEST_CASE("the separation ladder stays under its halving bound", "[harness][sweep]") {
  SweepSpec spec;
  spec.kind = SweepKind::d_decay;
  spec.base = compact_config();
  spec.ladder = {3.0, 6.0, 12.0};
  spec.out_dir = fresh_dir("dcl_harness_d").string();

  const SweepResult res = run_sweep(spec);
  REQUIRE(res.rows.size() == 3);
  for (const SweepRow& r : res.rows) {
    REQUIRE(r.ok());
    CHECK(r.norm_error == r.overlap_abs);
    CHECK(r.overlap_abs <= r.bound_I * (1.0 + 1e-9));
  }
  CHECK(res.rows[1].bound_I == Approx(res.rows[0].bound_I / 2.0).epsilon(1e-12));
  CHECK(res.rows[2].bound_I == Approx(res.rows[1].bound_I / 2.0).epsilon(1e-12));
  REQUIRE(res.fitted_rate.has_value());
  CHECK(*res.fitted_rate < 0.0);

  const std::string m0 = slurp(fs::path(spec.out_dir) / "point_000.manifest");
  CHECK(m0.find("R0 = 3\n") != std::string::npos);
}

TEST_CASE("the evolution ladder records leakage and trips its guard", "[harness][sweep]") {
  SweepSpec spec;
  spec.kind = SweepKind::epsilon_rate;
  spec.base = compact_config();
  spec.ladder = {0.5, 0.25, 0.125};
  spec.out_dir = fresh_dir("dcl_harness_eps").string();

  const SweepResult res = run_sweep(spec);
  REQUIRE(res.rows.size() == 3);
  for (const SweepRow& r : res.rows) {
    REQUIRE(r.ok());
    CHECK(r.norm_error > 0.0);
    CHECK(r.boundary_mass > 0.0);
    CHECK(r.boundary_mass < spec.base.boundary_threshold);
  }
  CHECK(res.fitted_rate.has_value());

  SECTION("an implausibly tight leakage budget fails points, not the sweep") {
    SweepSpec tight = spec;
    tight.base = compact_config("0.5", "boundary_threshold = 3e-10\n");
    tight.out_dir = fresh_dir("dcl_harness_eps_tight").string();

    const SweepResult guarded = run_sweep(tight);
    REQUIRE(guarded.rows.size() == 3);
    CHECK(guarded.rows[0].ok());
    CHECK(guarded.rows[1].status == "numerical_guard");
    CHECK(guarded.rows[2].status == "numerical_guard");
    CHECK_FALSE(guarded.rows[1].message.empty());
    CHECK(guarded.rows[1].message.find(',') == std::string::npos);
    CHECK_FALSE(guarded.fitted_rate.has_value());

    const std::string m2 = slurp(fs::path(tight.out_dir) / "point_002.manifest");
    CHECK(m2.find("status = numerical_guard") != std::string::npos);

    // plot data keeps only the surviving point
    const fs::path pd = fresh_dir("dcl_harness_plot_guard");
    fs::create_directories(pd);
    emit_plot_data(guarded, PlotStyle::loglog, pd.string());
    CHECK(count_lines(slurp(pd / "epsilon_rate_norm_error.dat")) == 1);

    SweepResult hollow = guarded;
    for (SweepRow& r : hollow.rows) r.status = "numerical_guard";
    const fs::path none = fresh_dir("dcl_harness_plot_none");
    CHECK_THROWS_AS(emit_plot_data(hollow, PlotStyle::loglog, none.string()),
                    config_error);
    CHECK_FALSE(fs::exists(none));
  }
}

TEST_CASE("command line failures map to distinct exit codes", "[harness][cli]") {
  if (!fs::exists("./dclab")) SKIP("driver binary not in the working directory");

  const auto run = [](const std::string& cmd) {
    const int st = std::system((cmd + " > /dev/null 2>&1").c_str());
    REQUIRE(st != -1);
    REQUIRE(WIFEXITED(st));
    return WEXITSTATUS(st);
  };

  const fs::path cfg = fs::temp_directory_path() / "dcl_harness_cli.cfg";
  spill(cfg, compact_text());

  CHECK(run("./dclab check --config " + cfg.string()) == 0);
  CHECK(run("./dclab run --config " + cfg.string()) == 0);
  CHECK(run("./dclab run --config /nonexistent/dcl_harness.cfg") == 2);
  CHECK(run("./dclab frobnicate") == 2);
  CHECK(run("./dclab sweep --sweep dq0_decay --ladder 2,4 --config " + cfg.string() +
            " --out " + fresh_dir("dcl_harness_cli_sweep").string()) == 2);

  const fs::path tight = fs::temp_directory_path() / "dcl_harness_cli_tight.cfg";
  spill(tight, compact_text("0.5", "boundary_threshold = 3e-10\n"));
  CHECK(run("./dclab sweep --sweep epsilon_rate --ladder 0.5,0.25,0.125 --config " +
            tight.string() + " --out " + fresh_dir("dcl_harness_cli_guard").string()) == 4);
}
