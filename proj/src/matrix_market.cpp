#include "hssmf/matrix_market.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hssmf {

  SparseMatrix<double> read_matrix_market(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw IoError(path + ": empty file");
    std::istringstream hdr(line);
    std::string banner, object, format, field, symmetry;
    hdr >> banner >> object >> format >> field >> symmetry;
    for (auto* s : {&object, &format, &field, &symmetry})
      for (auto& c : *s) c = static_cast<char>(std::tolower(c));
    if (banner != "%%MatrixMarket" || object != "matrix")
      throw IoError(path + ": not a MatrixMarket matrix file");
    if (format != "coordinate")
      throw IoError(path + ": only coordinate format is supported");
    if (field != "real" && field != "integer")
      throw IoError(path + ": unsupported field '" + field + "'");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general")
      throw IoError(path + ": unsupported symmetry '" + symmetry + "'");

    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '%') continue;
      break;
    }
    std::istringstream sz(line);
    long long rows = -1, cols = -1, nnz = -1;
    sz >> rows >> cols >> nnz;
    if (rows < 0 || cols < 0 || nnz < 0)
      throw IoError(path + ": malformed size line");
    if (rows != cols)
      throw IoError(path + ": matrix must be square (" + std::to_string(rows) +
                    "x" + std::to_string(cols) + ")");

    std::vector<std::tuple<int, int, double>> t;
    t.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    long long count = 0;
    while (count < nnz && std::getline(f, line)) {
      if (line.empty() || line[0] == '%') continue;
      long long i, j;
      double v;
      if (std::sscanf(line.c_str(), "%lld %lld %lf", &i, &j, &v) != 3)
        throw IoError(path + ": malformed entry on line '" + line + "'");
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw IoError(path + ": entry (" + std::to_string(i) + "," +
                      std::to_string(j) + ") out of range");
      t.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
      if (symmetric && i != j)
        t.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
      count++;
    }
    if (count != nnz)
      throw IoError(path + ": expected " + std::to_string(nnz) + " entries, got " +
                    std::to_string(count));
    return SparseMatrix<double>::from_triplets(static_cast<int>(rows), t);
  }

  void write_matrix_market(const SparseMatrix<double>& a, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f, "%d %d %lld\n", a.rows(), a.cols(),
                 static_cast<long long>(a.nnz()));
    for (int i = 0; i < a.rows(); i++)
      for (int k = a.row_begin(i); k < a.row_end(i); k++)
        std::fprintf(f, "%d %d %.17g\n", i + 1, a.ind()[k] + 1,
                     static_cast<double>(a.val()[k]));
    if (std::fclose(f) != 0) throw IoError("error closing '" + path + "'");
  }

} // namespace hssmf
