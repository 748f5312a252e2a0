// vmplane: command-line front end for rotationally symmetric planes.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vmplane/analysis.hpp"
#include "vmplane/constructions.hpp"
#include "vmplane/geodesics.hpp"
#include "vmplane/io.hpp"
#include "vmplane/jacobi.hpp"
#include "vmplane/oracle.hpp"

namespace {

using vmp::io::json;
using vmp::io::number;

enum Exit { kOk = 0, kFailure = 1, kInput = 2, kStar = 3, kWindow = 4, kUndetermined = 5 };

struct ProfileArgs {
  std::string profile;
  std::string spec;
  double r_max = 0.0;
  double tol = 1e-11;
};

void add_profile_options(CLI::App* app, ProfileArgs& a) {
  app->add_option("--profile", a.profile, "profile CSV (r,m,mp,K) or JSON descriptor {spec, r_max, tol}");
  app->add_option("--spec", a.spec, "curvature spec JSON (with --rmax)");
  app->add_option("--rmax", a.r_max, "window end when using --spec");
  app->add_option("--tol", a.tol, "solver tolerance when using --spec");
}

vmp::PlaneProfile load(const ProfileArgs& a) {
  if (!a.profile.empty()) return vmp::io::load_profile(a.profile);
  if (a.spec.empty()) throw vmp::InputError("need --profile or --spec with --rmax");
  if (!(a.r_max > 0)) throw vmp::InputError("--spec needs a positive --rmax");
  return vmp::solve_jacobi(vmp::io::spec_from_json(vmp::io::parse_json_file(a.spec)), a.r_max, a.tol);
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

// Built planes: CSV by extension, otherwise a JSON descriptor.
void save_profile(const vmp::PlaneProfile& p, const std::string& path, int samples) {
  if (vmp::io::ends_with(path, ".csv")) {
    std::ofstream out(path);
    if (!out) throw vmp::InputError("cannot write '" + path + "'");
    vmp::io::write_profile_csv(out, p, samples);
  } else {
    vmp::io::write_file(path, vmp::io::profile_descriptor(p.spec(), p.r_max(), p.tol()).dump(2) + "\n");
  }
}

json profile_summary(const vmp::PlaneProfile& p) {
  const auto& d = p.diagnostics();
  json j = {{"r_max", p.r_max()},
            {"tol", p.tol()},
            {"von_mangoldt", d.von_mangoldt},
            {"curvature_nonnegative", d.curvature_nonnegative},
            {"min_m", d.min_m},
            {"mp_at_rmax", d.mp_at_rmax}};
  if (d.vm_violation) j["vm_violation"] = *d.vm_violation;
  return j;
}

json error_json(const vmp::Error& e) {
  json j = {{"error", e.code()}, {"message", e.what()}};
  if (auto* s = dynamic_cast<const vmp::StarViolation*>(&e)) j["first_zero"] = s->first_zero();
  if (auto* w = dynamic_cast<const vmp::WindowLimited*>(&e)) j["indicator"] = w->indicator();
  if (auto* u = dynamic_cast<const vmp::Undetermined*>(&e)) {
    j["value"] = number(u->value());
    j["abs_error"] = number(u->abs_error());
  }
  if (auto* c = dynamic_cast<const vmp::ConstructionError*>(&e)) j["bracket"] = {number(c->bracket_lo()), number(c->bracket_hi())};
  return j;
}

int exit_code(const vmp::Error& e) {
  if (dynamic_cast<const vmp::StarViolation*>(&e)) return kStar;
  if (dynamic_cast<const vmp::WindowLimited*>(&e)) return kWindow;
  if (dynamic_cast<const vmp::Undetermined*>(&e)) return kUndetermined;
  if (dynamic_cast<const vmp::InputError*>(&e) || dynamic_cast<const vmp::ConstructionError*>(&e)) return kInput;
  return kFailure;
}

void require_decided(vmp::Verdict v, const char* what, const vmp::IntegralResult& T) {
  if (v == vmp::Verdict::undetermined) throw vmp::Undetermined(what, T.value, T.abs_error);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turn angles, rays, poles and critical sets of von Mangoldt planes"};
  app.require_subcommand(1);

  // plane build / plane check
  auto* plane = app.add_subcommand("plane", "build or inspect a plane")->require_subcommand(1);
  std::string spec_path, out_path;
  double build_rmax = 0.0, build_tol = 1e-11;
  int samples = 1001;
  auto* build = plane->add_subcommand("build", "solve the Jacobi IVP for a curvature spec");
  build->add_option("--spec", spec_path, "curvature spec JSON")->required();
  build->add_option("--rmax", build_rmax, "window end")->required();
  build->add_option("--tol", build_tol, "solver tolerance");
  build->add_option("--out", out_path, "profile output (.csv, or .json descriptor)");
  build->add_option("--samples", samples, "CSV rows");

  ProfileArgs pa;
  auto* check = plane->add_subcommand("check", "von Mangoldt flag, slope at infinity, total curvature, integrability");
  add_profile_options(check, pa);

  double r_q = 1.0, kappa = vmp::kPi / 2, qtol = 1e-8;
  auto* turn = app.add_subcommand("turn-angle", "turn angle of the geodesic launched at (r, kappa)");
  add_profile_options(turn, pa);
  turn->add_option("--r", r_q, "launch radius")->required();
  turn->add_option("--kappa", kappa, "launch angle from the outward meridian");
  turn->add_option("--qtol", qtol, "quadrature tolerance");

  auto* classify = app.add_subcommand("classify", "pole / critical / away classification of a radius");
  add_profile_options(classify, pa);
  classify->add_option("--r", r_q, "radius")->required();
  classify->add_option("--qtol", qtol, "quadrature tolerance");

  int jobs = 1;
  auto* radii = app.add_subcommand("radii", "R_m, rho_m and R_p with brackets");
  add_profile_options(radii, pa);
  radii->add_option("--qtol", qtol, "quadrature tolerance");

  int grid = 256;
  std::string svg_path, csv_path;
  bool no_radii = false;
  auto* scan = app.add_subcommand("scan", "critical and away sets over a radius grid");
  add_profile_options(scan, pa);
  scan->add_option("--grid", grid, "number of log-spaced radii");
  scan->add_option("--svg", svg_path, "T(r) plot");
  scan->add_option("--csv", csv_path, "interval list");
  scan->add_option("--jobs", jobs, "worker threads");
  scan->add_option("--qtol", qtol, "quadrature tolerance");
  scan->add_flag("--no-radii", no_radii, "skip R_m, rho_m, R_p");

  double slope = 0.3;
  std::optional<double> cone_rmax;
  auto* cone = app.add_subcommand("cone", "smoothed cone of prescribed terminal slope");
  cone->add_option("--slope", slope, "terminal slope in (0, 1]")->required();
  cone->add_option("--rmax", cone_rmax, "window end (default max(200, 3 rho))");
  cone->add_option("--out", out_path, "profile output (.csv, or .json descriptor)");

  auto* example = app.add_subcommand("example", "counterexample planes")->require_subcommand(1);
  double a = 3 * vmp::kPi / 4, depth = 5.0, width = 0.5, ex_rmax = 12.0;
  auto* mzero = example->add_subcommand("m-prime-zero", "K = 1 up to a, then a drop; m'(pi/2) = 0");
  mzero->add_option("--a", a, "end of the spherical cap, in (pi/2, pi)");
  mzero->add_option("--depth", depth, "drop depth");
  mzero->add_option("--width", width, "drop width");
  mzero->add_option("--rmax", ex_rmax, "window end");
  mzero->add_option("--out", out_path, "profile output");
  std::optional<double> ex_rq;
  auto* disc = example->add_subcommand("disconnected", "m' > 0 everywhere with a disconnected critical set");
  disc->add_option("--slope", slope, "base cone slope in (0, 1/2)");
  disc->add_option("--rq", ex_rq, "non-critical base radius (default: just above the base R_m)");
  disc->add_option("--out", out_path, "profile output");

  double x = 0.0, y = 0.0;
  int neck_samples = 100;
  auto* neck = app.add_subcommand("neck", "neck exclusion bound f for [x, y]");
  add_profile_options(neck, pa);
  neck->add_option("--x", x, "inner radius")->required();
  neck->add_option("--y", y, "outer radius")->required();
  neck->add_option("--samples", neck_samples, "verification samples in [x, f]");

  double s_max = 10.0;
  auto* trace = app.add_subcommand("trace", "integrate a geodesic");
  add_profile_options(trace, pa);
  trace->add_option("--r", r_q, "launch radius")->required();
  trace->add_option("--kappa", kappa, "launch angle");
  trace->add_option("--smax", s_max, "arclength budget");
  trace->add_option("--svg", svg_path, "polyline in the polar chart");
  trace->add_option("--csv", csv_path, "samples (s, r, theta)");

  auto* embed = app.add_subcommand("embed", "profile curve of the surface of revolution in R^3");
  add_profile_options(embed, pa);
  embed->add_option("--svg", svg_path, "profile curve plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  vmp::AnalysisOptions ao;
  ao.tol = qtol;
  ao.jobs = jobs;

  try {
    if (build->parsed()) {
      const auto spec = vmp::io::spec_from_json(vmp::io::parse_json_file(spec_path));
      const auto p = vmp::solve_jacobi(spec, build_rmax, build_tol);
      if (!out_path.empty()) save_profile(p, out_path, samples);
      emit(profile_summary(p));
    } else if (check->parsed()) {
      const auto p = load(pa);
      json j = profile_summary(p);
      const auto s = vmp::slope_at_infinity(p);
      j["slope_at_infinity"] = {{"estimate", number(s.estimate)},
                                {"error_indicator", s.error_indicator},
                                {"reliable", s.reliable},
                                {"diverges", s.diverges}};
      j["total_curvature"] = vmp::io::to_json(vmp::total_curvature(p));
      j["integrability"] = vmp::io::to_json(vmp::integrability(p));
      emit(j);
    } else if (turn->parsed()) {
      const auto p = load(pa);
      const auto T = vmp::turn_angle(p, {r_q, kappa}, {qtol, vmp::SingularMethod::substitution});
      json j = vmp::io::to_json(T);
      j["c"] = vmp::clairaut_constant(p, {r_q, kappa});
      emit(j);
      if (T.status == vmp::IntegralStatus::window_limited)
        throw vmp::WindowLimited("turn angle tail not resolved on this window", T.abs_error);
    } else if (classify->parsed()) {
      const auto p = load(pa);
      vmp::require_von_mangoldt(p);
      const auto T = vmp::parallel_turn_angle(p, r_q, qtol);
      const auto crit = vmp::critical_verdict(p, r_q, ao);
      const auto away = vmp::away_verdict(p, r_q, ao);
      const auto pole = vmp::pole_decision(p, r_q, ao);
      emit({{"r", r_q},
            {"T", vmp::io::to_json(T)},
            {"margin", number(vmp::kPi - T.value)},
            {"critical", vmp::to_string(crit)},
            {"away", vmp::to_string(away)},
            {"pole", vmp::to_string(pole.pole)},
            {"pole_limit_slope", {{"value", pole.limit.value}, {"abs_error", pole.limit.abs_error}}},
            {"pole_sup_T", pole.sup_T}});
      require_decided(crit, "critical verdict within the error band", T);
      require_decided(away, "away verdict within the error band", T);
      if (pole.pole == vmp::Verdict::undetermined)
        throw vmp::Undetermined("pole criterion within the error band", pole.limit.value, pole.limit.abs_error);
    } else if (radii->parsed()) {
      const auto p = load(pa);
      json j;
      if (p.curvature_nonnegative()) {
        j["R_m"] = vmp::io::to_json(vmp::critical_ball_radius(p, ao));
        j["rho_m"] = vmp::io::to_json(vmp::rho_m(p, ao));
      } else {
        j["R_m"] = nullptr;
        j["rho_m"] = nullptr;
        j["note"] = "curvature changes sign on the window; R_m and rho_m need G >= 0";
      }
      j["R_p"] = vmp::io::to_json(vmp::pole_radius(p, ao));
      emit(j);
    } else if (scan->parsed()) {
      const auto p = load(pa);
      if (grid < 2) throw vmp::InputError("--grid must be at least 2");
      const auto rep = vmp::scan_sets(p, vmp::default_scan_grid(p, grid), ao, {!no_radii});
      emit(vmp::io::to_json(rep));
      if (!svg_path.empty()) vmp::io::write_file(svg_path, vmp::io::turn_angle_svg(rep));
      if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        vmp::io::write_intervals_csv(out, rep);
      }
    } else if (cone->parsed()) {
      vmp::SmoothedConeOptions co;
      co.r_max = cone_rmax;
      const auto c = vmp::build_smoothed_cone(slope, co);
      if (!out_path.empty()) save_profile(c.profile, out_path, samples);
      json j = profile_summary(c.profile);
      j["u"] = c.u;
      j["epsilon"] = c.epsilon;
      j["rho"] = c.rho;
      j["achieved_slope"] = c.achieved_slope;
      j["spec"] = vmp::io::spec_to_json(c.profile.spec());
      emit(j);
    } else if (mzero->parsed()) {
      vmp::MprimeZeroOptions mo;
      mo.drop = {depth, width};
      mo.r_max = ex_rmax;
      const auto p = vmp::build_example_mprime_zero(a, mo);
      if (!out_path.empty()) save_profile(p, out_path, samples);
      json j = profile_summary(p);
      j["m_at_half_pi"] = p.m(vmp::kPi / 2);
      j["mp_at_half_pi"] = p.mp(vmp::kPi / 2);
      j["spec"] = vmp::io::spec_to_json(p.spec());
      emit(j);
    } else if (disc->parsed()) {
      vmp::DisconnectedOptions dopt;
      dopt.s_base = slope;
      dopt.r_q = ex_rq;
      const auto d = vmp::build_example_disconnected_positive_mprime(dopt);
      if (!out_path.empty()) save_profile(d.profile, out_path, samples);
      json j = profile_summary(d.profile);
      j["r_q"] = d.r_q;
      j["R"] = d.R;
      j["partial_integral"] = d.partial_integral;
      j["base_T"] = number(d.base_T);
      j["min_mp"] = d.profile.min_mp(0.0, d.profile.r_max());
      j["spec"] = vmp::io::spec_to_json(d.profile.spec());
      emit(j);
    } else if (neck->parsed()) {
      const auto p = load(pa);
      const auto nb = vmp::neck_bound(p, x, y, ao, neck_samples);
      emit({{"f", nb.f},
            {"b", nb.b},
            {"applicable", nb.applicable},
            {"x_le_f", nb.x_le_f},
            {"verified_disjoint", nb.verified_disjoint},
            {"samples_checked", nb.samples_checked},
            {"note", nb.note}});
    } else if (trace->parsed()) {
      const auto p = load(pa);
      const auto tr = vmp::trace_geodesic(p, {r_q, kappa}, s_max);
      const auto& end = tr.samples.back();
      emit({{"c", tr.c},
            {"status", vmp::to_string(tr.status)},
            {"s_end", tr.s_end},
            {"r_end", end.r},
            {"theta_end", end.theta},
            {"turning_points", tr.turning_points},
            {"max_speed_drift", tr.max_speed_drift},
            {"samples", tr.samples.size()}});
      if (!svg_path.empty()) vmp::io::write_file(svg_path, vmp::io::trace_svg(tr));
      if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        vmp::io::write_trace_csv(out, tr);
      }
    } else if (embed->parsed()) {
      const auto p = load(pa);
      const auto e = vmp::embed_profile(p);
      json j = {{"embeddable", e.embeddable}};
      if (e.witness) j["witness"] = *e.witness;
      emit(j);
      if (!e.embeddable)
        throw vmp::InputError("not embeddable: |m'| > 1 at r = " + std::to_string(e.witness.value_or(vmp::kInf)));
      if (!svg_path.empty()) vmp::io::write_file(svg_path, vmp::io::embed_svg(e));
    }
  } catch (const vmp::Error& e) {
    std::cerr << error_json(e).dump() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "failure"}, {"message", e.what()}}.dump() << '\n';
    return kFailure;
  }
  return kOk;
}
