#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "capshock/contour.hpp"
#include "capshock/evans.hpp"
#include "capshock/profile.hpp"

namespace capshock {

/// Everything that determines the record of one (v_plus, d) point.
struct PointConfig {
  double gamma = 1.4;
  double v_plus = 0.45;
  double d = 0.45;
  /// Contour radius; <= 0 picks max(12, high-frequency bound) per point.
  double radius = 0.0;
  int n_arc = 40;
  int n_imag = 30;
  double origin_offset = 1e-4;
  double max_phase_step = std::numbers::pi / 2;
  int max_depth = 12;
  double L_minus = -25.0;
  double L_plus = 25.0;
  double max_L = 400.0;
  double abs_tol = 1e-6;
  double rel_tol = 1e-8;
  int real_scan_points = 200;

  /// Throws DomainError.
  void validate() const;
  /// FNV-1a of the canonical serialisation, 16 hex digits.
  std::string hash() const;

  MeshOptions mesh() const;
  EvansOptions evans() const;
  ContourSpec contour(double radius) const;
};

struct SweepRecord {
  double gamma = 0.0;
  double v_plus = 0.0;
  double d = 0.0;
  std::string config_hash;

  /// Stage that threw ("profile", "validation", "evans", "contour", "real_scan");
  /// empty when every stage ran.
  std::string failure_stage;
  std::string failure_message;

  // Profile.
  std::string classification;
  double d_star = 0.0;
  double sup_slope = 0.0;
  double slope_bound = 0.0;   // epsilon^2 / 4
  bool slope_bound_ok = false;
  double phi_bound = 0.0;
  bool phi_bound_ok = false;
  bool argmax_on_phi_curve = false;
  bool lyapunov_monotone = false;
  double residual_norm = 0.0;
  double L_minus = 0.0;
  double L_plus = 0.0;
  int mesh_points = 0;
  bool profile_ok = false;

  // High-frequency bound.
  double C = 0.0;
  bool C_within_gamma = false;

  // Contour.
  bool has_contour = false;
  double radius = 0.0;
  int winding = 0;
  double min_abs_D = 0.0;
  int samples = 0;
  int refinements = 0;
  long evans_steps = 0;
  long evans_rejections = 0;

  // Real-axis scan, monotone profiles only.
  bool has_real_scan = false;
  int real_scan_sign_changes = 0;
  double real_scan_min_abs = 0.0;
  double real_scan_min_lambda = 0.0;

  double wall_seconds = 0.0;

  /// winding 0, validation passed, and no real crossing for monotone profiles.
  bool pass() const;
  bool unstable() const { return has_contour && winding != 0; }
};

/// Record plus the computed objects, for figure output.
struct PointRun {
  SweepRecord record;
  std::shared_ptr<const ProfileSolution> profile;
  std::optional<ContourResult> contour;
  std::optional<RealAxisScan> scan;
};

/// profile -> validation -> contour -> winding -> real scan (monotone). Stage
/// failures are caught and recorded; only an invalid config throws.
PointRun run_point_detailed(const PointConfig& config, int jobs = 1);
SweepRecord run_point(const PointConfig& config, int jobs = 1);

struct SweepConfig {
  PointConfig base;  // v_plus and d are overridden per grid point
  std::vector<double> v_plus_list;
  std::vector<double> d_list;
  std::filesystem::path out_dir = "sweep_out";
  int jobs = 0;  // <= 0: grid points capped by hardware threads
  bool resume = false;

  /// Full 15 x 16 grid: v_plus in 0.10..0.80 and d in 0.05..0.80, step 0.05.
  static SweepConfig full_grid();

  void validate() const;
  std::vector<PointConfig> points() const;
};

enum ExitCode : int { kExitPass = 0, kExitNumeric = 1, kExitUnstable = 2, kExitInvalid = 3 };

struct SweepResult {
  std::vector<SweepRecord> records;  // grid order: v_plus major, d minor
  int resumed = 0;                   // points loaded from earlier record files
  int exit_code() const;
};

/// Runs every grid point, writing one record file per point under
/// out_dir/points and the summary table out_dir/summary.tsv. With resume set,
/// points whose record file carries the same config hash are loaded instead
/// of recomputed.
SweepResult run_sweep(const SweepConfig& config);

int exit_code(const std::vector<SweepRecord>& records);

}  // namespace capshock
