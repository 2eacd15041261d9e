#ifndef HSSMF_SOLVER_OPTIONS_HPP
#define HSSMF_SOLVER_OPTIONS_HPP

#include <algorithm>
#include <string>

#include "hssmf/errors.hpp"
#include "hssmf/ordering.hpp"

namespace hssmf {

  enum class SolverMode { Auto, MF, MFHSS };

  inline const char* name(SolverMode m) {
    switch (m) {
      case SolverMode::MF: return "mf";
      case SolverMode::MFHSS: return "mf-hss";
      default: return "auto";
    }
  }
  inline SolverMode parse_solver_mode(const std::string& s) {
    if (s == "auto") return SolverMode::Auto;
    if (s == "mf") return SolverMode::MF;
    if (s == "mf-hss") return SolverMode::MFHSS;
    throw IoError("unknown solver mode: " + s);
  }

  struct SolverOptions {
    OrderingStrategy strategy = OrderingStrategy::Graph;
    int nd_leaf = 32;    // minimum subdomain size for dissection leaves
    int ls = 0;          // switch level: fronts with level < ls use HSS
    double eps = 1e-8;   // HSS compression tolerance
    int leaf = 128;      // HSS cluster leaf size b
    int d0 = 128;        // initial random sample columns
    int dd = 128;        // sample column increment per adaptation round
    int p = 10;          // oversampling
    int min_hss = 512;   // minimum front dimension for HSS compression
    int max_rank = 0;    // HSS rank guard; 0 resolves to min(n/2, 5000)
    int threads = 0;     // 0 keeps the runtime's pool
    SolverMode mode = SolverMode::Auto;
    double rtol = 1e-6;
    double atol = 1e-10;
    int restart = 30;
    int maxit = 500;

    int switch_level() const { return mode == SolverMode::MF ? 0 : ls; }
    int resolved_max_rank(int n) const {
      return max_rank > 0 ? max_rank : std::min(n / 2, 5000);
    }
    void validate() const {
      if (eps < 0 || eps >= 1) throw IoError("eps must be in [0,1)");
      if (ls < 0) throw IoError("ls must be >= 0");
      if (leaf < 16) throw IoError("leaf size b must be >= 16");
      if (d0 < 1 || dd < 1 || p < 0 || p >= d0)
        throw IoError("need d0 >= 1, dd >= 1, 0 <= p < d0");
      if (restart < 1 || maxit < 0) throw IoError("bad restart/maxit");
      if (nd_leaf < 1) throw IoError("dissection leaf must be >= 1");
    }
  };

}  // namespace hssmf

#endif
