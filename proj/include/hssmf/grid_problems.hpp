#ifndef HSSMF_GRID_PROBLEMS_HPP
#define HSSMF_GRID_PROBLEMS_HPP

#include <array>
#include <cmath>
#include <string>

#include "sparse_matrix.hpp"

namespace hssmf {

  // built-in regular-grid test problems on the unit square/cube with
  // eliminated Dirichlet boundaries. vertex (i,j[,l]) of a k^d grid sits at
  // ((i+1)h, (j+1)h[, (l+1)h]) with h = 1/(k+1) and gets index
  // i + j*k [+ l*k^2].
  //
  //  p2d/p3d: Poisson, 5/7-point stencil, coefficients {4,-1}/{6,-1}
  //  c2d/c3d: convection-diffusion -nu*lap(u) + v.grad(u) with first-order
  //           upwind convection; entries are the operator scaled by h^2 so
  //           the diffusion part matches nu times the Poisson stencil. the
  //           recirculating velocity fields are
  //             v2d = ( x(1-x)(2y-1), y(1-y)(2x-1) )
  //             v3d = ( 2x(1-x)(2y-1)z, -y(1-y)(2x-1), -(2x-1)(2y-1)z(1-z) )
  enum class GridKind { P2D, P3D, C2D, C3D };

  inline const char* name(GridKind k) {
    switch (k) {
      case GridKind::P2D: return "p2d";
      case GridKind::P3D: return "p3d";
      case GridKind::C2D: return "c2d";
      case GridKind::C3D: return "c3d";
    }
    return "?";
  }

  struct GridGeometry {
    std::array<int, 3> dims{1, 1, 1};  // vertices per axis, x fastest
    int ndims = 0;
    bool valid() const { return ndims > 0; }
    int vertex(int i, int j, int l = 0) const {
      return i + dims[0] * (j + dims[1] * l);
    }
  };

  template<typename scalar_t> struct GridProblem {
    SparseMatrix<scalar_t> A;
    GridGeometry geom;
    GridKind kind;
    int k = 0;
    double nu = 0;
  };

  namespace detail {

    // upwind coefficients for one axis: contribution of velocity v at mesh
    // width h to (diag, minus-side neighbor, plus-side neighbor)
    inline void upwind(double v, double h, double& diag, double& lo, double& hi) {
      diag += h * std::abs(v);
      lo -= h * std::max(v, 0.0);
      hi += h * std::min(v, 0.0);
    }

  } // namespace detail

  template<typename scalar_t = double>
  GridProblem<scalar_t> generate_grid_problem(GridKind kind, int k, double nu = 1e-4) {
    if (k < 1) throw SolverError("grid size k must be >= 1");
    GridProblem<scalar_t> p;
    p.kind = kind;
    p.k = k;
    p.nu = nu;
    const bool threed = kind == GridKind::P3D || kind == GridKind::C3D;
    const bool convect = kind == GridKind::C2D || kind == GridKind::C3D;
    const int kz = threed ? k : 1;
    p.geom.dims = {k, k, kz};
    p.geom.ndims = threed ? 3 : 2;
    const double h = 1.0 / (k + 1);
    const double dcoef = convect ? nu : 1.0;

    std::vector<std::tuple<int, int, scalar_t>> t;
    t.reserve(static_cast<std::size_t>(p.geom.dims[0]) * p.geom.dims[1] * kz * (threed ? 7 : 5));
    for (int l = 0; l < kz; l++)
      for (int j = 0; j < k; j++)
        for (int i = 0; i < k; i++) {
          const int row = p.geom.vertex(i, j, l);
          const double x = (i + 1) * h, y = (j + 1) * h, z = (l + 1) * h;
          double diag = (threed ? 6.0 : 4.0) * dcoef;
          double w = -dcoef, e = -dcoef, s = -dcoef, n = -dcoef;
          double dn = -dcoef, up = -dcoef;
          if (convect) {
            double vx, vy, vz = 0;
            if (threed) {
              vx = 2 * x * (1 - x) * (2 * y - 1) * z;
              vy = -y * (1 - y) * (2 * x - 1);
              vz = -(2 * x - 1) * (2 * y - 1) * z * (1 - z);
            } else {
              vx = x * (1 - x) * (2 * y - 1);
              vy = y * (1 - y) * (2 * x - 1);
            }
            detail::upwind(vx, h, diag, w, e);
            detail::upwind(vy, h, diag, s, n);
            if (threed) detail::upwind(vz, h, diag, dn, up);
          }
          t.emplace_back(row, row, scalar_t(diag));
          if (i > 0) t.emplace_back(row, p.geom.vertex(i - 1, j, l), scalar_t(w));
          if (i < k - 1) t.emplace_back(row, p.geom.vertex(i + 1, j, l), scalar_t(e));
          if (j > 0) t.emplace_back(row, p.geom.vertex(i, j - 1, l), scalar_t(s));
          if (j < k - 1) t.emplace_back(row, p.geom.vertex(i, j + 1, l), scalar_t(n));
          if (threed) {
            if (l > 0) t.emplace_back(row, p.geom.vertex(i, j, l - 1), scalar_t(dn));
            if (l < k - 1) t.emplace_back(row, p.geom.vertex(i, j, l + 1), scalar_t(up));
          }
        }
    const int n_total = k * k * kz;
    p.A = SparseMatrix<scalar_t>::from_triplets(n_total, t);
    return p;
  }

  inline bool parse_grid_kind(const std::string& s, GridKind& k) {
    if (s == "p2d") k = GridKind::P2D;
    else if (s == "p3d") k = GridKind::P3D;
    else if (s == "c2d") k = GridKind::C2D;
    else if (s == "c3d") k = GridKind::C3D;
    else return false;
    return true;
  }

} // namespace hssmf

#endif
