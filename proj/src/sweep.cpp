#include "capshock/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <thread>

#include "capshock/errors.hpp"
#include "capshock/gas_model.hpp"
#include "capshock/io.hpp"

namespace capshock {

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string canonical(const PointConfig& c) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "gamma=%.17g;v_plus=%.17g;d=%.17g;radius=%.17g;n_arc=%d;n_imag=%d;"
                "origin_offset=%.17g;max_phase_step=%.17g;max_depth=%d;L_minus=%.17g;"
                "L_plus=%.17g;max_L=%.17g;abs_tol=%.17g;rel_tol=%.17g;real_scan_points=%d;v=%d",
                c.gamma, c.v_plus, c.d, c.radius, c.n_arc, c.n_imag, c.origin_offset,
                c.max_phase_step, c.max_depth, c.L_minus, c.L_plus, c.max_L, c.abs_tol, c.rel_tol,
                c.real_scan_points, kFormatVersion);
  return buf;
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int k = 0; k <= n; ++k) out.push_back(std::round((lo + k * step) * 1e6) / 1e6);
  return out;
}

std::string point_file_name(const PointConfig& c) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "v%.4f_d%.4f_%s.jsonl", c.v_plus, c.d, c.hash().c_str());
  return buf;
}

}  // namespace

void PointConfig::validate() const {
  GasParams::make(gamma, v_plus, d);
  if (radius > 0.0) contour(radius).validate();
  else contour(12.0).validate();
  if (!(L_minus < 0.0 && L_plus > 0.0)) throw DomainError("need L_minus < 0 < L_plus");
  if (!(max_L >= std::max(-L_minus, L_plus))) throw DomainError("max_L below the initial window");
  if (!(abs_tol > 0.0 && rel_tol > 0.0)) throw DomainError("tolerances must be positive");
  if (real_scan_points < 1) throw DomainError("real_scan_points must be at least 1");
}

std::string PointConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical(*this))));
  return buf;
}

MeshOptions PointConfig::mesh() const {
  MeshOptions m;
  m.L_minus = L_minus;
  m.L_plus = L_plus;
  m.max_L = max_L;
  return m;
}

EvansOptions PointConfig::evans() const {
  EvansOptions e;
  e.abs_tol = abs_tol;
  e.rel_tol = rel_tol;
  return e;
}

ContourSpec PointConfig::contour(double r) const {
  ContourSpec s;
  s.radius = r;
  s.n_arc = n_arc;
  s.n_imag = n_imag;
  s.origin_offset = origin_offset;
  s.max_phase_step = max_phase_step;
  s.max_depth = max_depth;
  return s;
}

bool SweepRecord::pass() const {
  if (!failure_stage.empty() || !has_contour || winding != 0 || !profile_ok) return false;
  if (classification == to_string(ProfileShape::Monotone)) {
    return has_real_scan && real_scan_sign_changes == 0;
  }
  return true;
}

PointRun run_point_detailed(const PointConfig& config, int jobs) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  PointRun run;
  SweepRecord& r = run.record;
  r.gamma = config.gamma;
  r.v_plus = config.v_plus;
  r.d = config.d;
  r.config_hash = config.hash();
  const GasParams params = GasParams::make(config.gamma, config.v_plus, config.d);
  r.d_star = params.d_star;

  const char* stage = "profile";
  try {
    auto profile = std::make_shared<ProfileSolution>(solve_profile(params, config.mesh()));
    run.profile = profile;
    r.classification = to_string(profile->classification);
    r.L_minus = profile->L_minus();
    r.L_plus = profile->L_plus();
    r.mesh_points = static_cast<int>(profile->grid.size());

    stage = "validation";
    const ValidationReport report = validate(*profile);
    r.sup_slope = report.sup_slope;
    r.slope_bound = report.slope_bound;
    r.slope_bound_ok = report.slope_bound_ok;
    r.phi_bound = report.phi_bound;
    r.phi_bound_ok = report.phi_bound_ok;
    r.argmax_on_phi_curve = report.argmax_on_phi_curve;
    r.lyapunov_monotone = report.lyapunov_monotone;
    r.residual_norm = report.residual_norm;
    r.profile_ok = report.passed();
    const HighFrequencyBound hf = hf_bound(profile->v_hat, profile->w_hat, params);
    r.C = hf.C;
    r.C_within_gamma = !hf.exceeds_gamma;

    stage = "evans";
    const EvansSystem system(profile, config.evans());
    r.radius = config.radius > 0.0 ? std::max(config.radius, hf.radius) : hf.radius;

    stage = "contour";
    run.contour = evans_contour(system, config.contour(r.radius), {jobs, false});
    r.has_contour = true;
    r.winding = run.contour->winding;
    r.min_abs_D = run.contour->min_abs_D;
    r.samples = static_cast<int>(run.contour->samples.size());
    r.refinements = run.contour->refinements_used;
    for (const auto& s : run.contour->samples) {
      r.evans_steps += s.steps;
      r.evans_rejections += s.rejections;
    }

    if (profile->classification == ProfileShape::Monotone) {
      stage = "real_scan";
      run.scan = system.real_axis_scan(r.radius, config.real_scan_points, jobs);
      r.has_real_scan = true;
      r.real_scan_sign_changes = run.scan->sign_changes;
      r.real_scan_min_abs = run.scan->min_abs;
      r.real_scan_min_lambda = run.scan->min_abs_lambda;
    }
  } catch (const Error& e) {
    r.failure_stage = stage;
    r.failure_message = e.what();
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

SweepRecord run_point(const PointConfig& config, int jobs) {
  return run_point_detailed(config, jobs).record;
}

SweepConfig SweepConfig::full_grid() {
  SweepConfig c;
  c.v_plus_list = grid(0.10, 0.80, 0.05);
  c.d_list = grid(0.05, 0.80, 0.05);
  return c;
}

void SweepConfig::validate() const {
  if (v_plus_list.empty() || d_list.empty()) throw DomainError("sweep lists must be non-empty");
  for (const auto& p : points()) p.validate();
}

std::vector<PointConfig> SweepConfig::points() const {
  std::vector<PointConfig> out;
  for (double v : v_plus_list) {
    for (double d : d_list) {
      PointConfig p = base;
      p.v_plus = v;
      p.d = d;
      out.push_back(p);
    }
  }
  return out;
}

int exit_code(const std::vector<SweepRecord>& records) {
  if (std::any_of(records.begin(), records.end(), [](const auto& r) { return r.unstable(); })) {
    return kExitUnstable;
  }
  if (std::any_of(records.begin(), records.end(), [](const auto& r) { return !r.pass(); })) {
    return kExitNumeric;
  }
  return kExitPass;
}

int SweepResult::exit_code() const { return capshock::exit_code(records); }

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  namespace fs = std::filesystem;
  const fs::path dir = config.out_dir / "points";
  fs::create_directories(dir);

  const auto points = config.points();
  SweepResult result;
  result.records.resize(points.size());
  std::vector<char> loaded(points.size(), 0);
  if (config.resume) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      const fs::path file = dir / point_file_name(points[i]);
      if (!fs::exists(file)) continue;
      try {
        SweepRecord r = read_record(file);
        if (r.config_hash != points[i].hash()) continue;
        result.records[i] = std::move(r);
        loaded[i] = 1;
        ++result.resumed;
      } catch (const Error&) {
        // Unreadable leftovers are recomputed.
      }
    }
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!loaded[i]) todo.push_back(i);
  }
  int jobs = config.jobs;
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, std::max<std::size_t>(1, todo.size()));
  parallel_for(todo.size(), jobs, [&](std::size_t k) {
    const std::size_t i = todo[k];
    result.records[i] = run_point(points[i]);
    write_record(dir / point_file_name(points[i]), result.records[i]);
  });
  write_atomic(config.out_dir / "summary.tsv", summary_table(result.records));
  return result;
}

}  // namespace capshock
