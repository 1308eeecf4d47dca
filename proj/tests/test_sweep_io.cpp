#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "capshock/errors.hpp"
#include "capshock/io.hpp"
#include "capshock/sweep.hpp"

using namespace capshock;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("CAPSHOCK_CLI");
  REQUIRE(cli != nullptr);
  const int status = std::system((std::string(cli) + " " + args + " > /dev/null 2>&1").c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

SweepRecord sample_record() {
  SweepRecord r;
  r.gamma = 1.4;
  r.v_plus = 0.45;
  r.d = 0.45;
  r.config_hash = "0123456789abcdef";
  r.classification = "monotone";
  r.d_star = 0.1 + 1.0 / 3.0;
  r.sup_slope = 0.0123456789012345678;
  r.winding = 0;
  r.has_contour = true;
  r.min_abs_D = 1.2345e-7;
  r.evans_steps = 123456789012L;
  r.failure_message = "line one\nquote \" tab\t";
  return r;
}

}  // namespace

TEST_CASE("profile table round trip") {
  TempDir tmp("capshock_io_profile");
  const ProfileSolution prof = solve_profile(GasParams::make(1.4, 0.45, 0.45));
  write_profile(tmp.path / "p.dat", prof);
  const Table t = read_table(tmp.path / "p.dat", "profile");
  CHECK(t.version == kFormatVersion);
  CHECK(t.columns == std::vector<std::string>{"x", "v_hat", "v_hat_x", "v_hat_xx"});
  REQUIRE(t.rows.size() == prof.grid.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(t.rows[i][0] == prof.grid[i]);
    CHECK(t.rows[i][1] == prof.v_hat[i]);
    CHECK(t.rows[i][2] == prof.w_hat[i]);
    CHECK(t.rows[i][3] == prof.v_hat_xx[i]);
  }
  CHECK(t.meta_value("classification") == "oscillatory");
  CHECK(std::stod(t.meta_value("gamma")) == 1.4);
  CHECK_THROWS_AS(t.column("nope"), DomainError);
  CHECK_THROWS_AS(t.meta_value("nope"), DomainError);

  write_phase_portrait(tmp.path / "phase.dat", prof);
  const Table ph = read_table(tmp.path / "phase.dat", "phase_portrait");
  CHECK(ph.rows.size() == prof.grid.size());
  const std::size_t cv = ph.column("v_hat"), cp = ph.column("phi");
  CHECK(ph.rows[5][cp] == doctest::Approx(phi(ph.rows[5][cv], prof.params)).epsilon(1e-14));
}

TEST_CASE("tables refuse other kinds and versions") {
  TempDir tmp("capshock_io_refuse");
  const ProfileSolution prof = solve_profile(GasParams::make(1.4, 0.45, 0.45));
  write_profile(tmp.path / "p.dat", prof);
  CHECK_THROWS_AS(read_table(tmp.path / "p.dat", "contour"), DomainError);

  std::string text = slurp(tmp.path / "p.dat");
  text.replace(text.find(" v1"), 3, " v2");
  write_atomic(tmp.path / "v2.dat", text);
  CHECK_THROWS_AS(read_table(tmp.path / "v2.dat", "profile"), DomainError);

  write_atomic(tmp.path / "bad.dat", "# capshock profile v1\n# x v_hat\n1 2\n3\n");
  CHECK_THROWS_AS(read_table(tmp.path / "bad.dat", "profile"), DomainError);
  CHECK_THROWS_AS(read_table(tmp.path / "missing.dat", "profile"), Error);
}

TEST_CASE("atomic writes replace the target") {
  TempDir tmp("capshock_io_atomic");
  write_atomic(tmp.path / "a.txt", "first");
  write_atomic(tmp.path / "a.txt", "second");
  CHECK(slurp(tmp.path / "a.txt") == "second");
  int files = 0;
  for (const auto& e : fs::directory_iterator(tmp.path)) files += e.is_regular_file();
  CHECK(files == 1);
}

TEST_CASE("record round trip") {
  TempDir tmp("capshock_io_record");
  const SweepRecord r = sample_record();
  const std::string text = record_to_text(r);
  CHECK(text.rfind("{\"format\":\"capshock-record\",\"version\":1}\n", 0) == 0);
  const SweepRecord back = record_from_text(text);
  CHECK(back.d_star == r.d_star);
  CHECK(back.sup_slope == r.sup_slope);
  CHECK(back.min_abs_D == r.min_abs_D);
  CHECK(back.evans_steps == r.evans_steps);
  CHECK(back.failure_message == r.failure_message);
  CHECK(back.has_contour);
  CHECK(record_to_text(back) == text);

  write_record(tmp.path / "r.jsonl", r);
  CHECK(record_to_text(read_record(tmp.path / "r.jsonl")) == text);

  std::string bumped = text;
  bumped.replace(bumped.find("\"version\":1"), 11, "\"version\":2");
  CHECK_THROWS_AS(record_from_text(bumped), DomainError);
  CHECK_THROWS_AS(record_from_text("not json"), DomainError);
}

TEST_CASE("pass and exit codes") {
  SweepRecord ok = sample_record();
  ok.profile_ok = true;
  ok.has_real_scan = true;
  ok.failure_message.clear();
  CHECK(ok.pass());
  CHECK(exit_code({ok}) == kExitPass);

  SweepRecord failed = ok;
  failed.failure_stage = "contour";
  CHECK_FALSE(failed.pass());
  CHECK(exit_code({ok, failed}) == kExitNumeric);

  SweepRecord crossing = ok;
  crossing.has_real_scan = true;
  crossing.real_scan_sign_changes = 1;
  CHECK_FALSE(crossing.pass());

  SweepRecord unstable = ok;
  unstable.winding = 1;
  CHECK(unstable.unstable());
  CHECK(exit_code({failed, unstable, ok}) == kExitUnstable);
}

TEST_CASE("point config hashing and validation") {
  PointConfig a;
  PointConfig b = a;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.abs_tol = 1e-7;
  CHECK(a.hash() != b.hash());
  b = a;
  b.d = std::nextafter(a.d, 1.0);
  CHECK(a.hash() != b.hash());

  PointConfig bad;
  bad.v_plus = 1.2;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = {};
  bad.d = -1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = {};
  bad.abs_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);

  const SweepConfig full = SweepConfig::full_grid();
  CHECK(full.points().size() == 240);
  CHECK(full.v_plus_list.front() == 0.1);
  CHECK(full.v_plus_list.back() == 0.8);
  CHECK(full.d_list.front() == 0.05);
  CHECK(full.d_list.back() == 0.8);
  SweepConfig empty;
  CHECK_THROWS_AS(empty.validate(), DomainError);
}

TEST_CASE("single point sweep, summary and resume") {
  TempDir tmp("capshock_io_sweep");
  SweepConfig cfg;
  cfg.v_plus_list = {0.45};
  cfg.d_list = {0.45, 0.65};
  cfg.out_dir = tmp.path;
  cfg.jobs = 2;
  const SweepResult first = run_sweep(cfg);
  REQUIRE(first.records.size() == 2);
  CHECK(first.resumed == 0);
  CHECK(first.exit_code() == kExitPass);

  const SweepRecord direct = run_point(cfg.points()[0]);
  const SweepRecord& swept = first.records[0];
  CHECK(direct.config_hash == swept.config_hash);
  CHECK(direct.winding == swept.winding);
  CHECK(direct.min_abs_D == swept.min_abs_D);
  CHECK(direct.samples == swept.samples);
  CHECK(direct.sup_slope == swept.sup_slope);

  const std::string summary = slurp(tmp.path / "summary.tsv");
  CHECK(summary.rfind("# capshock summary v1\n", 0) == 0);
  CHECK(summary == summary_table(first.records));
  CHECK(summary.find("wall") == std::string::npos);

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(tmp.path / "points")) files.push_back(e.path());
  REQUIRE(files.size() == 2);
  fs::remove(files[0]);

  cfg.resume = true;
  const SweepResult second = run_sweep(cfg);
  CHECK(second.resumed == 1);
  CHECK(slurp(tmp.path / "summary.tsv") == summary);

  // A changed numerical setting invalidates every stored record.
  cfg.base.n_arc = 41;
  const SweepResult third = run_sweep(cfg);
  CHECK(third.resumed == 0);
}

TEST_CASE("figure data files") {
  TempDir tmp("capshock_io_emit");
  PointConfig c;
  c.v_plus = 0.6;
  c.d = 0.45;
  c.real_scan_points = 20;
  const PointRun run = run_point_detailed(c);
  REQUIRE(run.record.failure_stage.empty());
  const auto written = emit_figure_data(run, tmp.path);
  CHECK(written.size() == 5);
  const Table contour = read_table(tmp.path / "contour.dat", "contour");
  CHECK(contour.rows.size() == run.contour->samples.size());
  CHECK(std::stoi(contour.meta_value("winding")) == 0);
  const Table scan = read_table(tmp.path / "real_scan.dat", "real_scan");
  CHECK(scan.rows.size() == 20);
  CHECK(read_record(tmp.path / "record.jsonl").config_hash == c.hash());
}

TEST_CASE("command line") {
  if (std::getenv("CAPSHOCK_CLI") == nullptr) return;
  TempDir tmp("capshock_io_cli");
  CHECK(run_cli("profile --gamma 1.4 --v-plus 0.45 -d 0.45 -o " + (tmp.path / "p.dat").string()) == 0);
  CHECK(read_table(tmp.path / "p.dat", "profile").rows.size() > 10);
  CHECK(run_cli("evans --v-plus 0.45 -d 0.45 --lambda 1,2") == 0);
  CHECK(run_cli("profile --v-plus 1.5") == kExitInvalid);
  CHECK(run_cli("no-such-command") == kExitInvalid);

  std::ofstream(tmp.path / "cfg.toml") << "v_plus=0.45\nd=0.45\nout_dir=\"" << (tmp.path / "out").string()
                                       << "\"\n";
  CHECK(run_cli("sweep --config " + (tmp.path / "cfg.toml").string()) == 0);
  CHECK(fs::exists(tmp.path / "out" / "summary.tsv"));
  CHECK(run_cli("profile --config " + (tmp.path / "cfg.toml").string()) == kExitInvalid);
  std::ofstream(tmp.path / "bad.toml") << "bogus_key=1\n";
  CHECK(run_cli("sweep --config " + (tmp.path / "bad.toml").string()) == kExitInvalid);
}
