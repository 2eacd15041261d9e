// writes one of the built-in grid problems as a MatrixMarket file
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "hssmf/grid_problems.hpp"
#include "hssmf/matrix_market.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generate a 2d/3d poisson or convection-diffusion test matrix"};
  std::string gen = "p2d", out;
  int k = 10;
  double nu = 1e-4;
  app.add_option("--gen", gen, "problem kind")
      ->check(CLI::IsMember({"p2d", "p3d", "c2d", "c3d"}))
      ->envname("HSSMF_GEN");
  app.add_option("--k", k, "grid points per dimension")
      ->check(CLI::PositiveNumber)
      ->envname("HSSMF_K");
  app.add_option("--nu", nu, "diffusion coefficient (c2d/c3d)")
      ->envname("HSSMF_NU");
  app.add_option("--out", out, "output MatrixMarket path")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    hssmf::GridKind kind = gen == "p2d"   ? hssmf::GridKind::P2D
                           : gen == "p3d" ? hssmf::GridKind::P3D
                           : gen == "c2d" ? hssmf::GridKind::C2D
                                          : hssmf::GridKind::C3D;
    auto p = hssmf::generate_grid_problem<double>(kind, k, nu);
    hssmf::write_matrix_market(p.A, out);
    std::printf("%s k=%d: n=%d nnz=%lld -> %s\n", gen.c_str(), k, p.A.rows(),
                static_cast<long long>(p.A.nnz()), out.c_str());
  } catch (const hssmf::SolverError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
