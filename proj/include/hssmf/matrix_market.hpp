#ifndef HSSMF_MATRIX_MARKET_HPP
#define HSSMF_MATRIX_MARKET_HPP

#include <string>

#include "sparse_matrix.hpp"

namespace hssmf {

  // Matrix Market coordinate format, real entries. reading expands symmetric
  // storage and sums duplicate coordinates; writing emits "general" with 17
  // significant digits so a read-write-read cycle reproduces the matrix
  // exactly.
  SparseMatrix<double> read_matrix_market(const std::string& path);
  void write_matrix_market(const SparseMatrix<double>& a, const std::string& path);

} // namespace hssmf

#endif
