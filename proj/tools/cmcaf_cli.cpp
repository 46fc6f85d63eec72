// cmcaf: command line front end for the annulus construction.
//
//   cmcaf per --alpha A --beta B --gamma G
//   cmcaf sigma --alpha A --beta B --gamma G
//   cmcaf level --n N --alpha A --beta B
//   cmcaf family --n N [--report family.json]
//   cmcaf construct --n N --mu M --mesh out.obj --report out.json [--ply out.ply]
//   cmcaf verify --report in.json --mesh in.obj
//   cmcaf sweep --n N --mu-max X --steps S --csv out.csv
//
// Exit status: 0 when every verdict passes, 1 on failed verdicts or numerical
// errors, 2 on usage errors.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cmcaf/artifact_io.hpp"

using namespace cmcaf;

namespace {

void print_verdicts(const std::vector<Verdict>& vs) {
  for (const auto& v : vs)
    std::printf("%-28s %s  residual=%-12s tol=%-8s %s\n", v.name.c_str(), v.pass ? "PASS" : "FAIL",
                format_double(v.residual).c_str(), format_double(v.tolerance).c_str(), v.details.c_str());
}

void print_value(const char* name, double x) { std::printf("%s = %s\n", name, format_double(x).c_str()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free boundary CMC annuli in the unit ball: periods, family, surfaces, verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Tolerances tol;
  try {
    tol = Tolerances::from_env();
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  auto positive = CLI::PositiveNumber;
  app.add_option("--tol-ode", tol.ode, "ODE tolerance (CMCAF_TOL_ODE)")->check(positive);
  app.add_option("--tol-root", tol.root, "root bracket tolerance (CMCAF_TOL_ROOT)")->check(positive);
  app.add_option("--tol-quad", tol.quad, "quadrature tolerance (CMCAF_TOL_QUAD)")->check(positive);
  app.add_option("--tol-geom", tol.geom, "geometric residual tolerance (CMCAF_TOL_GEOM)")->check(positive);
  app.fallthrough();

  double alpha = 1, beta = 1, gamma = 1;
  auto add_abg = [&](CLI::App* sub, bool with_gamma) {
    sub->add_option("--alpha", alpha)->required()->check(CLI::Range(1.0, 1e300));
    sub->add_option("--beta", beta)->required()->check(CLI::Range(1.0, 1e300));
    if (with_gamma) sub->add_option("--gamma", gamma)->required()->check(CLI::Range(1.0, 1e300));
  };
  auto* per_cmd = app.add_subcommand("per", "print Per(alpha, beta, gamma)");
  add_abg(per_cmd, true);
  auto* sigma_cmd = app.add_subcommand("sigma", "print sigma(alpha, beta, gamma)");
  add_abg(sigma_cmd, true);

  int n = 2;
  auto* level_cmd = app.add_subcommand("level", "print gamma on the level Per = -1/n");
  level_cmd->add_option("--n", n)->required()->check(CLI::Range(2, 1000));
  add_abg(level_cmd, false);

  std::string family_report;
  auto* family_cmd = app.add_subcommand("family", "locate beta_1 and beta* and write a family report");
  family_cmd->add_option("--n", n)->required()->check(CLI::Range(2, 1000));
  family_cmd->add_option("--report", family_report, "output path (default family_n<N>.json)");

  double mu = 0, mu_step = 0.05, u_extent = 1;
  std::size_t u_samples = 257, v_samples = 0;
  std::string mesh_path, report_path, ply_path;
  auto* construct_cmd = app.add_subcommand("construct", "build, verify and export one annulus");
  construct_cmd->add_option("--n", n)->required()->check(CLI::Range(2, 1000));
  construct_cmd->add_option("--mu", mu)->required()->check(CLI::NonNegativeNumber);
  construct_cmd->add_option("--u-samples", u_samples, "odd, >= 5")->capture_default_str();
  construct_cmd->add_option("--v-samples", v_samples, "multiple of 2n; 0 means 512n")->capture_default_str();
  construct_cmd->add_option("--u-extent", u_extent, "multiple of u* to integrate to (control runs)")
      ->capture_default_str()
      ->check(positive);
  construct_cmd->add_option("--mu-step", mu_step, "largest continuation step")->capture_default_str()->check(positive);
  construct_cmd->add_option("--mesh", mesh_path, "OBJ output")->required();
  construct_cmd->add_option("--report", report_path, "JSON report output")->required();
  construct_cmd->add_option("--ply", ply_path, "binary PLY output");

  auto* verify_cmd = app.add_subcommand("verify", "re-run the checks on stored artifacts");
  verify_cmd->add_option("--report", report_path)->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--mesh", mesh_path)->required()->check(CLI::ExistingFile);

  double mu_max = 0;
  int steps = 0;
  std::string csv_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "continue the family and verify each point");
  sweep_cmd->add_option("--n", n)->required()->check(CLI::Range(2, 1000));
  sweep_cmd->add_option("--mu-max", mu_max)->required()->check(positive);
  sweep_cmd->add_option("--steps", steps)->required()->check(CLI::Range(1, 100000));
  sweep_cmd->add_option("--csv", csv_path)->required();
  sweep_cmd->add_option("--u-samples", u_samples)->capture_default_str();
  sweep_cmd->add_option("--v-samples", v_samples)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*per_cmd) {
      std::printf("%s\n", format_double(per_map(ParamPoint(alpha, beta, gamma), tol)).c_str());
      return 0;
    }
    if (*sigma_cmd) {
      std::printf("%s\n", format_double(sigma_period(ParamPoint(alpha, beta, gamma), tol)).c_str());
      return 0;
    }
    if (*level_cmd) {
      std::printf("%s\n", format_double(gamma_level(-1.0 / n, alpha, beta, tol)).c_str());
      return 0;
    }
    if (*family_cmd) {
      const BetaStar bs = find_beta_star(n, tol);
      const ParamPoint p = upsilon(n, bs.beta, tol);
      const FamilyPoint fp = make_family_point(n, 0, p, match_data(p, tol), tol);
      print_value("beta1", bs.beta1);
      print_value("beta_star", bs.beta);
      print_value("gamma_star", p.gamma());
      print_value("u_star", fp.u_star);
      print_value("tau", fp.tau);
      if (family_report.empty()) family_report = "family_n" + std::to_string(n) + ".json";
      detail::write_file(family_report, dump_family_report(make_family_report(n, bs, fp)));
      std::printf("wrote %s\n", family_report.c_str());
      return 0;
    }
    VerifyOptions vopt;
    vopt.analytic_tol = tol.geom;
    if (*construct_cmd) {
      const FamilyBranch br = continue_to(n, mu, mu_step, tol);
      if (br.truncated || br.points.empty() || br.points.back().mu != mu) {
        std::fprintf(stderr, "error: continuation did not reach mu=%s: %s\n", format_double(mu).c_str(),
                     br.notice.c_str());
        return 1;
      }
      AssemblyOptions aopt;
      aopt.u_samples = u_samples;
      aopt.v_samples = v_samples;
      aopt.u_extent_factor = u_extent;
      const AnnulusModel m = assemble_annulus(br.points.back(), aopt, tol);
      const auto vs = verify_all(m, vopt);
      const AnnulusReport r = make_report(m, vs);
      print_value("alpha", r.alpha);
      print_value("beta", r.beta);
      print_value("gamma", r.gamma);
      print_value("H_rescaled", r.H_rescaled);
      if (r.necksize_unscaled) print_value("necksize_unscaled", *r.necksize_unscaled);
      print_verdicts(vs);
      write_report(r, report_path);
      export_mesh(m, MeshFormat::obj, mesh_path, tol.geom);
      if (!ply_path.empty()) export_mesh(m, MeshFormat::ply, ply_path, tol.geom);
      return all_pass(vs) ? 0 : 1;
    }
    if (*verify_cmd) {
      const AnnulusReport r = read_report(report_path);
      const AnnulusModel m = model_from_artifacts(r, import_mesh(mesh_path), tol);
      const auto vs = verify_all(m, vopt);
      print_verdicts(vs);
      return all_pass(vs) ? 0 : 1;
    }
    if (*sweep_cmd) {
      AssemblyOptions aopt;
      aopt.u_samples = u_samples;
      aopt.v_samples = v_samples;
      const SweepResult s = run_sweep(n, mu_max, steps, aopt, vopt, tol);
      write_sweep_csv(s, csv_path);
      for (const auto& row : s.rows)
        std::printf("mu=%-10s beta=%-20s H=%-20s %s\n", format_double(row.fp.mu).c_str(),
                    format_double(row.fp.param.beta()).c_str(), format_double(row.H).c_str(),
                    row.pass ? "PASS" : "FAIL");
      std::printf("verified prefix: %zu of %zu requested\n", s.verified_prefix, std::size_t(steps) + 1);
      if (s.truncated) std::printf("%s\n", s.notice.c_str());
      return s.verified_prefix == std::size_t(steps) + 1 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
