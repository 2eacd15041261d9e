#ifndef HSSMF_ERRORS_HPP
#define HSSMF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hssmf {

  // base for everything thrown on purpose, so callers can catch one type
  class SolverError : public std::runtime_error {
  public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
  };

  class IoError : public SolverError {
  public:
    explicit IoError(const std::string& msg) : SolverError(msg) {}
  };

  // exact zero pivot column during partial-pivot LU
  class SingularMatrixError : public SolverError {
  public:
    SingularMatrixError(const std::string& where, int column)
      : SolverError(where + ": exactly singular, zero pivot column " +
                    std::to_string(column)), column_(column) {}
    int column() const { return column_; }
  private:
    int column_;
  };

  // no column permutation can produce a zero-free diagonal
  class StructuralSingularError : public SolverError {
  public:
    explicit StructuralSingularError(const std::string& msg) : SolverError(msg) {}
  };

  // adaptive sampling hit the rank cap without certifying; caller should
  // fall back to a dense front
  class HssRankExceeded : public SolverError {
  public:
    HssRankExceeded(int node, int cap)
      : SolverError("hss compression: rank cap " + std::to_string(cap) +
                    " exceeded at cluster " + std::to_string(node)),
        node_(node), cap_(cap) {}
    int node() const { return node_; }
    int cap() const { return cap_; }
  private:
    int node_, cap_;
  };

  class KrylovDivergenceError : public SolverError {
  public:
    explicit KrylovDivergenceError(const std::string& msg) : SolverError(msg) {}
  };

} // namespace hssmf

#endif
