// Builds the n = 2 annulus at a small mu, prints its verdicts and writes an OBJ.
//
//   ./nodoid_sample [mu] [out.obj]

#include <cstdio>
#include <cstdlib>

#include "cmcaf/artifact_io.hpp"

int main(int argc, char** argv) {
  const double mu = argc > 1 ? std::atof(argv[1]) : 0.02;
  const char* out = argc > 2 ? argv[2] : "annulus_n2.obj";

  const cmcaf::FamilyBranch branch = cmcaf::continue_to(2, mu);
  const cmcaf::FamilyPoint& fp = branch.points.back();
  std::printf("mu=%g alpha=%.12g beta=%.12g gamma=%.12g u*=%.10g\n", fp.mu, fp.param.alpha(), fp.param.beta(),
              fp.param.gamma(), fp.u_star);

  // a coarse grid keeps the sample quick; the defaults are 257 x 512n
  cmcaf::AssemblyOptions opt;
  opt.u_samples = 65;
  opt.v_samples = 512;
  const cmcaf::AnnulusModel m = cmcaf::assemble_annulus(fp, opt);
  std::printf("H after rescaling to the unit ball: %.10g\n", m.mean_curvature_rescaled);

  for (const auto& v : cmcaf::verify_all(m))
    std::printf("  %-28s %s %.3e\n", v.name.c_str(), v.pass ? "pass" : "FAIL", v.residual);

  cmcaf::export_mesh(m, cmcaf::MeshFormat::obj, out);
  std::printf("wrote %s\n", out);
}
