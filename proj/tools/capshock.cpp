// capshock: profiles, Evans functions and stability sweeps for capillarity shocks.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>

#include "capshock/contour.hpp"
#include "capshock/errors.hpp"
#include "capshock/evans.hpp"
#include "capshock/io.hpp"
#include "capshock/profile.hpp"
#include "capshock/sweep.hpp"

using namespace capshock;

namespace {

/// Flat key=value config files whose keys belong to one subcommand.
class SubcommandConfig : public CLI::ConfigTOML {
 public:
  explicit SubcommandConfig(std::string sub) : sub_(std::move(sub)) {}
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    for (auto& item : items) item.parents.insert(item.parents.begin(), sub_);
    return items;
  }

 private:
  std::string sub_;
};

void add_numeric_options(CLI::App* app, PointConfig& c) {
  app->add_option("--radius", c.radius, "Contour radius (<= 0: max(12, high-frequency bound))");
  app->add_option("--n-arc,--n_arc", c.n_arc, "First-quadrant arc samples")->check(CLI::PositiveNumber);
  app->add_option("--n-imag,--n_imag", c.n_imag, "Samples on the vertical segment")->check(CLI::PositiveNumber);
  app->add_option("--origin-offset,--origin_offset", c.origin_offset, "Contour offset from lambda = 0");
  app->add_option("--max-phase-step,--max_phase_step", c.max_phase_step, "Bisection threshold (rad)");
  app->add_option("--max-depth,--max_depth", c.max_depth, "Maximum bisection depth");
  app->add_option("--L-minus,--L_minus", c.L_minus, "Initial left end of the profile domain");
  app->add_option("--L-plus,--L_plus", c.L_plus, "Initial right end of the profile domain");
  app->add_option("--max-L,--max_L", c.max_L, "Largest |L| reached by domain enlargement");
  app->add_option("--abs-tol,--abs_tol", c.abs_tol, "Evans ODE absolute tolerance");
  app->add_option("--rel-tol,--rel_tol", c.rel_tol, "Evans ODE relative tolerance");
  app->add_option("--real-scan-points,--real_scan_points", c.real_scan_points,
                  "Chebyshev points of the real-axis scan");
}

void add_point_options(CLI::App* app, PointConfig& c) {
  app->add_option("--gamma", c.gamma, "Adiabatic index");
  app->add_option("--v-plus,--v_plus", c.v_plus, "Right end state (v_minus = 1)");
  app->add_option("-d,--d", c.d, "Capillarity strength");
  add_numeric_options(app, c);
}

void print_profile(const ProfileSolution& p, const ValidationReport& r) {
  std::printf("gamma            %.6g\n", p.params.gamma);
  std::printf("v_plus           %.6g\n", p.params.v_plus);
  std::printf("d                %.6g\n", p.params.d);
  std::printf("a                %.12g\n", p.params.a);
  std::printf("mach             %.12g\n", p.params.mach);
  std::printf("d_star           %.12g\n", p.params.d_star);
  std::printf("classification   %s\n", to_string(p.classification));
  std::printf("domain           [%g, %g], %zu points\n", p.L_minus(), p.L_plus(), p.grid.size());
  std::printf("residual         %.3e\n", r.residual_norm);
  std::printf("endpoint errors  %.3e %.3e\n", r.left_endpoint_error, r.right_endpoint_error);
  std::printf("sup|v_x|         %.12g\n", r.sup_slope);
  std::printf("eps^2/4          %.12g  %s\n", r.slope_bound, r.slope_bound_ok ? "ok" : "exceeded");
  std::printf("sup|phi|         %.12g  %s\n", r.phi_bound, r.phi_bound_ok ? "ok" : "exceeded");
  std::printf("argmax on phi    %s (x=%.6g, crossing %.6g)\n", r.argmax_on_phi_curve ? "yes" : "no",
              r.argmax_x, r.crossing_x);
  std::printf("lyapunov         %s (worst drop %.3e)\n", r.lyapunov_monotone ? "monotone" : "not monotone",
              r.lyapunov_worst_drop);
  std::printf("validation       %s\n", r.passed() ? "pass" : "fail");
}

void print_contour(const ContourResult& c, double radius) {
  std::printf("radius           %.6g\n", radius);
  std::printf("samples          %zu\n", c.samples.size());
  std::printf("refinements      %d\n", c.refinements_used);
  std::printf("min|D|           %.6e\n", c.min_abs_D);
  std::printf("winding          %d\n", c.winding);
}

std::shared_ptr<ProfileSolution> profile_for(const PointConfig& c) {
  const GasParams params = GasParams::make(c.gamma, c.v_plus, c.d);
  return std::make_shared<ProfileSolution>(solve_profile(params, c.mesh()));
}

double radius_for(const PointConfig& c, const ProfileSolution& p) {
  const double hf = default_radius(p);
  return c.radius > 0.0 ? std::max(c.radius, hf) : hf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Profiles, Evans functions and winding-number sweeps for capillarity shocks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value file with the subcommand's options");
  app.allow_config_extras(CLI::config_extras_mode::error);

  PointConfig point;
  int jobs = 1;

  auto* profile_cmd = app.add_subcommand("profile", "Solve and validate one shock profile");
  add_point_options(profile_cmd, point);
  std::string profile_out, phase_out;
  profile_cmd->add_option("-o,--out", profile_out, "Write the profile table");
  profile_cmd->add_option("--phase-out", phase_out, "Write the phase-portrait table");

  auto* evans_cmd = app.add_subcommand("evans", "Evans function at one lambda, or around the contour");
  add_point_options(evans_cmd, point);
  std::vector<double> lambda;
  bool forward = false;
  std::string contour_out;
  evans_cmd->add_option("--lambda", lambda, "re[,im]; omit for the full contour")
      ->delimiter(',')
      ->expected(1, 2);
  evans_cmd->add_flag("--forward", forward, "Forward compound variant instead of the adjoint pairing");
  evans_cmd->add_option("-o,--out", contour_out, "Write the contour table");
  evans_cmd->add_option("-j,--jobs", jobs, "Worker threads");

  auto* scan_cmd = app.add_subcommand("scan-real", "Evans function on the real axis (0, R]");
  add_point_options(scan_cmd, point);
  std::string scan_out;
  scan_cmd->add_option("-o,--out", scan_out, "Write the scan table");
  scan_cmd->add_option("-j,--jobs", jobs, "Worker threads");

  auto* sweep_cmd = app.add_subcommand("sweep", "Winding numbers over a (v_plus, d) grid");
  SweepConfig sweep = SweepConfig::full_grid();
  sweep_cmd->add_option("--gamma", sweep.base.gamma, "Adiabatic index");
  sweep_cmd->add_option("--v-plus,--v_plus", sweep.v_plus_list, "Comma-separated v_plus values")
      ->delimiter(',');
  sweep_cmd->add_option("-d,--d", sweep.d_list, "Comma-separated d values")->delimiter(',');
  add_numeric_options(sweep_cmd, sweep.base);
  sweep_cmd->add_option("--out-dir,--out_dir", sweep.out_dir, "Output directory");
  sweep_cmd->add_option("-j,--jobs", sweep.jobs, "Parallel grid points (<= 0: all cores)");
  sweep_cmd->add_flag("--resume", sweep.resume, "Skip points with a matching record file");
  sweep_cmd->fallthrough();
  app.config_formatter(std::make_shared<SubcommandConfig>("sweep"));

  auto* emit_cmd = app.add_subcommand("emit", "Run one point and write figure data");
  add_point_options(emit_cmd, point);
  std::string emit_dir = "figure_data";
  emit_cmd->add_option("--out-dir,--out_dir", emit_dir, "Output directory");
  emit_cmd->add_option("-j,--jobs", jobs, "Worker threads");

  for (auto* sub : {profile_cmd, evans_cmd, scan_cmd, emit_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }
  // The config formatter routes every key to the sweep options.
  if (app.count("--config") > 0 && !sweep_cmd->parsed()) {
    std::cerr << "--config is only supported by the sweep subcommand\n";
    return kExitInvalid;
  }

  try {
    if (profile_cmd->parsed()) {
      const auto p = profile_for(point);
      const ValidationReport report = validate(*p);
      print_profile(*p, report);
      if (!profile_out.empty()) write_profile(profile_out, *p);
      if (!phase_out.empty()) write_phase_portrait(phase_out, *p);
      return report.passed() ? kExitPass : kExitNumeric;
    }
    if (evans_cmd->parsed()) {
      const auto p = profile_for(point);
      const EvansSystem system(p, point.evans());
      if (!lambda.empty()) {
        const cdouble l(lambda[0], lambda.size() > 1 ? lambda[1] : 0.0);
        const auto modes = system.analytic_modes(l);
        if (forward) {
          const cdouble D = system.evaluate_forward(l, modes);
          std::printf("lambda (%.12g, %.12g)  D (%.15g, %.15g)\n", l.real(), l.imag(), D.real(),
                      D.imag());
        } else {
          const auto e = system.evaluate(l, modes);
          std::printf("lambda (%.12g, %.12g)  D (%.15g, %.15g)  steps %d/%d  rejections %d/%d\n",
                      l.real(), l.imag(), e.value.real(), e.value.imag(), e.minus_stats.steps,
                      e.plus_stats.steps, e.minus_stats.rejections, e.plus_stats.rejections);
        }
        return kExitPass;
      }
      const double radius = radius_for(point, *p);
      const ContourResult c = forward ? evans_contour_forward(system, point.contour(radius), jobs)
                                      : evans_contour(system, point.contour(radius), {jobs, false});
      print_contour(c, radius);
      if (!contour_out.empty()) write_contour(contour_out, c, p->params);
      return c.winding == 0 ? kExitPass : kExitUnstable;
    }
    if (scan_cmd->parsed()) {
      const auto p = profile_for(point);
      const EvansSystem system(p, point.evans());
      const double radius = radius_for(point, *p);
      const RealAxisScan scan = system.real_axis_scan(radius, point.real_scan_points, jobs);
      std::printf("radius           %.6g\n", radius);
      std::printf("points           %zu\n", scan.lambdas.size());
      std::printf("min|D|           %.6e at lambda=%.6g\n", scan.min_abs, scan.min_abs_lambda);
      std::printf("max|Im D|/|D|    %.3e\n", scan.max_imag_ratio);
      std::printf("sign changes     %d\n", scan.sign_changes);
      if (!scan_out.empty()) write_real_scan(scan_out, scan, p->params);
      return scan.zero_crossing() ? kExitUnstable : kExitPass;
    }
    if (sweep_cmd->parsed()) {
      const SweepResult result = run_sweep(sweep);
      std::cout << summary_table(result.records);
      return result.exit_code();
    }
    if (emit_cmd->parsed()) {
      const PointRun run = run_point_detailed(point, jobs);
      for (const auto& path : emit_figure_data(run, emit_dir)) std::printf("%s\n", path.c_str());
      if (!run.record.failure_stage.empty()) {
        std::fprintf(stderr, "%s failed: %s\n", run.record.failure_stage.c_str(),
                     run.record.failure_message.c_str());
      }
      return exit_code({run.record});
    }
  } catch (const DomainError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitInvalid;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitInvalid;
}
