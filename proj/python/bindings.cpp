// python bindings for the solver library
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hssmf/grid_problems.hpp"
#include "hssmf/matrix_market.hpp"

namespace py = pybind11;
using namespace hssmf;

namespace {

  GridKind parse_kind(const std::string& s) {
    if (s == "p2d") return GridKind::P2D;
    if (s == "p3d") return GridKind::P3D;
    if (s == "c2d") return GridKind::C2D;
    if (s == "c3d") return GridKind::C3D;
    throw IoError("unknown problem kind '" + s + "'");
  }

  // csr triple as numpy arrays (copies)
  py::tuple csr_of(const SparseMatrix<double>& a) {
    py::array_t<int> ptr(a.ptr().size(), a.ptr().data());
    py::array_t<int> ind(a.ind().size(), a.ind().data());
    py::array_t<double> val(a.val().size(), a.val().data());
    return py::make_tuple(a.rows(), ptr, ind, val);
  }

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "sparse multifrontal solver with hss-compressed fronts";

  py::register_exception<IoError>(m, "IoError");
  py::register_exception<SolverError>(m, "SolverError");

  m.def(
      "generate_problem",
      [](const std::string& kind, int k, double nu) {
        auto p = generate_grid_problem<double>(parse_kind(kind), k, nu);
        return csr_of(p.A);
      },
      py::arg("kind"), py::arg("k"), py::arg("nu") = 1e-4,
      "generate a grid test problem; returns (n, ptr, ind, val) in csr form");

  m.def(
      "read_matrix",
      [](const std::string& path) { return csr_of(read_matrix_market(path)); },
      py::arg("path"), "read a MatrixMarket file; returns (n, ptr, ind, val)");

  m.def(
      "write_matrix",
      [](const std::string& path, int n, py::array_t<int> ptr,
         py::array_t<int> ind, py::array_t<double> val) {
        std::vector<std::tuple<int, int, double>> t;
        auto p = ptr.unchecked<1>();
        auto i = ind.unchecked<1>();
        auto v = val.unchecked<1>();
        for (int r = 0; r < n; r++)
          for (py::ssize_t k = p(r); k < p(r + 1); k++)
            t.emplace_back(r, i(k), v(k));
        write_matrix_market(SparseMatrix<double>::from_triplets(n, t), path);
      },
      py::arg("path"), py::arg("n"), py::arg("ptr"), py::arg("ind"),
      py::arg("val"), "write a csr matrix as a MatrixMarket file");
}
