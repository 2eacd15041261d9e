#include "hssmf/stats.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace hssmf {

  namespace {

    nlohmann::json config_json(const RunStats& s) {
      const auto& o = s.opts;
      return {{"source", s.source},
              {"strategy", name(o.strategy)},
              {"mode", name(o.mode)},
              {"n", s.n},
              {"nnz", s.nnz},
              {"ls", o.ls},
              {"eps", o.eps},
              {"leaf", o.leaf},
              {"d0", o.d0},
              {"dd", o.dd},
              {"p", o.p},
              {"min_hss", o.min_hss},
              {"rank_guard", o.resolved_max_rank(s.n)},
              {"threads", o.threads},
              {"rtol", o.rtol},
              {"atol", o.atol},
              {"restart", o.restart},
              {"maxit", o.maxit},
              {"nd_leaf", o.nd_leaf}};
    }

  }  // namespace

  std::string stats_to_json(const RunStats& s, bool include_per_front) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["config"] = config_json(s);
    j["timings"] = {{"analysis", s.t_analysis},
                    {"factor", s.t_factor},
                    {"solve", s.t_solve},
                    {"total", s.t_total}};
    j["factor"] = {{"factor_flops", s.factor_flops},
                   {"solve_flops", s.solve_flops},
                   {"factor_nnz", s.factor_nnz},
                   {"factor_nnz_bytes", s.factor_nnz_bytes},
                   {"peak_bytes", s.peak_bytes},
                   {"max_rank", s.max_rank},
                   {"fronts", s.fronts},
                   {"hss_fronts", s.hss_fronts},
                   {"hss_fallbacks", s.hss_fallbacks},
                   {"tree_depth", s.tree_depth}};
    j["solve"] = {{"method", s.method},
                  {"iterations", s.iterations},
                  {"relres", s.relres},
                  {"absres", s.absres},
                  {"converged", s.converged}};
    if (!s.error.empty()) j["error"] = s.error;
    if (include_per_front) {
      auto& pf = j["per_front"] = nlohmann::json::array();
      for (const auto& f : s.per_front)
        pf.push_back({{"id", f.id},
                      {"level", f.level},
                      {"dim", f.dim},
                      {"sep", f.sep},
                      {"rank", f.rank},
                      {"flops", f.flops},
                      {"type", f.type}});
    }
    return j.dump(1) + "\n";
  }

  namespace {

    std::string fmt_g(double v) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return buf;
    }
    std::string csv_quote(const std::string& s) {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char c : s) {
        if (c == '"') q += '"';
        q += c;
      }
      return q + "\"";
    }

  }  // namespace

  std::string stats_csv_header() {
    return "source,strategy,mode,n,nnz,ls,eps,leaf,d0,dd,p,min_hss,"
           "rank_guard,threads,rtol,atol,restart,maxit,nd_leaf,"
           "analysis_s,factor_s,solve_s,total_s,"
           "factor_flops,solve_flops,factor_nnz,factor_nnz_bytes,peak_bytes,"
           "max_rank,fronts,hss_fronts,hss_fallbacks,tree_depth,"
           "method,iterations,relres,absres,converged,error";
  }

  std::string stats_csv_row(const RunStats& s) {
    const auto& o = s.opts;
    std::ostringstream r;
    r << csv_quote(s.source) << ',' << name(o.strategy) << ',' << name(o.mode)
      << ',' << s.n << ',' << s.nnz << ',' << o.ls << ',' << fmt_g(o.eps)
      << ',' << o.leaf << ',' << o.d0 << ',' << o.dd << ',' << o.p << ','
      << o.min_hss << ',' << o.resolved_max_rank(s.n) << ',' << o.threads
      << ',' << fmt_g(o.rtol) << ',' << fmt_g(o.atol) << ',' << o.restart
      << ',' << o.maxit << ',' << o.nd_leaf << ',' << fmt_g(s.t_analysis)
      << ',' << fmt_g(s.t_factor) << ',' << fmt_g(s.t_solve) << ','
      << fmt_g(s.t_total) << ',' << s.factor_flops << ',' << s.solve_flops
      << ',' << s.factor_nnz << ',' << s.factor_nnz_bytes << ','
      << s.peak_bytes << ',' << s.max_rank << ',' << s.fronts << ','
      << s.hss_fronts << ',' << s.hss_fallbacks << ',' << s.tree_depth << ','
      << s.method << ',' << s.iterations << ',' << fmt_g(s.relres) << ','
      << fmt_g(s.absres) << ',' << (s.converged ? 1 : 0) << ','
      << csv_quote(s.error);
    return r.str();
  }

}  // namespace hssmf
