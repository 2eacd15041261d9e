#ifndef HSSMF_STATS_HPP
#define HSSMF_STATS_HPP

#include <string>
#include <vector>

#include "hssmf/solver_options.hpp"

namespace hssmf {

  struct FrontStat {
    int id = 0;
    int level = 0;
    int dim = 0;
    int sep = 0;
    int rank = 0;  // observed HSS rank; 0 for dense fronts
    long long flops = 0;
    std::string type;  // dense | hss | hss_dense (rank-guard fallback)
  };

  struct RunStats {
    SolverOptions opts;
    std::string source;
    int n = 0;
    long long nnz = 0;
    // wall-clock phase timings (seconds); excluded from determinism checks
    double t_analysis = 0, t_factor = 0, t_solve = 0, t_total = 0;
    // factorization totals
    long long factor_flops = 0, solve_flops = 0;
    long long factor_nnz = 0, factor_nnz_bytes = 0, peak_bytes = 0;
    int max_rank = 0, fronts = 0, hss_fronts = 0, hss_fallbacks = 0;
    int tree_depth = 0;
    // solve phase
    std::string method = "none";  // refinement | gmres | none
    int iterations = 0;
    double relres = 0, absres = 0;
    bool converged = false;
    std::string error;  // nonempty when a sweep run failed
    std::vector<FrontStat> per_front;
  };

  // versioned JSON document; keys sorted so identical runs serialize
  // byte-identically (timings live in their own subobject)
  std::string stats_to_json(const RunStats& s, bool include_per_front = true);

  std::string stats_csv_header();
  std::string stats_csv_row(const RunStats& s);

}  // namespace hssmf

#endif
