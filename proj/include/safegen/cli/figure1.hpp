#pragma once

// Lipschitz ratio sweeps. "met" cells use commuting, aligned systems inside
// the stability margin; "violated" cells use unconstrained Gaussian systems.

#include <map>
#include <tuple>

#include "safegen/cli/context.hpp"
#include "safegen/cli/svg.hpp"
#include "safegen/lipschitz.hpp"

namespace safegen::cli {

inline const std::vector<std::string> kFigure1Columns = {
    "dim",      "normA", "normB", "normRinv",   "alpha",       "seed",        "L_unsafe",
    "L_safe",   "ratio", "lower_coeff", "upper_bound", "tasks_total", "tasks_feasible"};

struct Figure1Group {
  double normA, normB, normRinv;
  std::vector<double> ratio, lower;
};

/// Groups the rows of one panel CSV by (normB, normRinv, normA), in order of
/// first appearance after sorting.
inline std::vector<Figure1Group> figure1_groups(const CsvTable& t) {
  const int cA = t.column("normA"), cB = t.column("normB"), cR = t.column("normRinv"), cr = t.column("ratio"),
            cl = t.column("lower_coeff");
  std::map<std::tuple<double, double, double>, Figure1Group> m;
  for (const auto& r : t.rows) {
    const double a = cell_num(r[cA]), b = cell_num(r[cB]), rr = cell_num(r[cR]);
    auto& g = m[{b, rr, a}];
    g.normA = a;
    g.normB = b;
    g.normRinv = rr;
    g.ratio.push_back(cell_num(r[cr]));
    g.lower.push_back(cell_num(r[cl]));
  }
  std::vector<Figure1Group> out;
  for (auto& [k, g] : m) out.push_back(std::move(g));
  return out;
}

inline Stats log_stats(const std::vector<double>& v) {
  std::vector<double> l;
  for (double x : v) l.push_back(x > 0 ? std::log(x) : std::nan(""));
  return stats(l);
}

/// Chart for one panel, computed from the panel CSV only. Met panels show the
/// mean ratio with plain standard deviations and the lower-bound curve;
/// violated panels show geometric means with log-space deviations.
inline std::string figure1_svg(const CsvTable& t, bool met, const std::string& title) {
  SvgPlot p;
  p.title = title;
  p.xlabel = "||A||_2";
  p.ylabel = met ? "Lipschitz ratio (mean +- std)" : "Lipschitz ratio (geo. mean, log-space std)";
  p.log_y = true;
  p.hline = 1.0;
  std::map<std::pair<double, double>, std::pair<SvgSeries, SvgSeries>> by;
  for (const Figure1Group& g : figure1_groups(t)) {
    auto& [s, lb] = by[{g.normB, g.normRinv}];
    s.label = "||B||=" + detail::num4(g.normB) + " ||R^-1||=" + detail::num4(g.normRinv);
    s.x.push_back(g.normA);
    if (met) {
      const Stats st = stats(g.ratio);
      s.y.push_back(st.mean);
      s.lo.push_back(st.mean - st.stddev);
      s.hi.push_back(st.mean + st.stddev);
      lb.label = "lower bound";
      lb.dashed = true;
      lb.x.push_back(g.normA);
      lb.y.push_back(stats(g.lower).mean);
    } else {
      const Stats st = log_stats(g.ratio);
      s.y.push_back(std::exp(st.mean));
      s.lo.push_back(std::exp(st.mean - st.stddev));
      s.hi.push_back(std::exp(st.mean + st.stddev));
    }
  }
  for (auto& [k, v] : by) {
    p.series.push_back(v.first);
    if (met) p.series.push_back(v.second);
  }
  return render_svg(p);
}

inline int run_figure1(RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  const std::string S = "figure1";
  cfg.check_keys(S, {"modes", "dims", "rel_tol", "met.normA", "met.normB", "met.normD", "met.normRinv", "met.alpha",
                     "met.seeds", "met.tasks_per_batch", "violated.normA", "violated.normB", "violated.normRinv",
                     "violated.seeds", "violated.tasks_per_batch"});
  RatioOptions ropt;
  ropt.search.rel_tol = cfg.num(S, "rel_tol", 1e-4);

  struct Cell {
    std::string mode;
    int dim;
    double nA, nB, nR;
    int seed_index;
    long per_batch;
    std::uint64_t seed;
    std::string id;
  };
  std::vector<Cell> cells;
  std::vector<std::pair<std::string, int>> panels;
  for (const std::string& mode : cfg.list(S, "modes")) {
    if (mode != "met" && mode != "violated") throw ConfigError("[figure1] modes: unknown mode '" + mode + "'");
    const auto nA = cfg.nums(S, mode + ".normA"), nB = cfg.nums(S, mode + ".normB"),
               nR = cfg.nums(S, mode + ".normRinv");
    const long seeds = cfg.integer(S, mode + ".seeds");
    if (seeds < 1) throw ConfigError("[figure1] " + mode + ".seeds must be >= 1");
    for (double d : cfg.nums(S, "dims")) {
      const int dim = static_cast<int>(d);
      if (dim < 1 || dim != d) throw ConfigError("[figure1] dims: expected positive integers");
      long per_batch = 100L * dim * dim;
      if (cfg.str(S, mode + ".tasks_per_batch") != "auto") per_batch = cfg.integer(S, mode + ".tasks_per_batch");
      if (per_batch < 1) throw ConfigError("[figure1] " + mode + ".tasks_per_batch must be >= 1");
      panels.emplace_back(mode, dim);
      for (size_t ia = 0; ia < nA.size(); ++ia)
        for (size_t ib = 0; ib < nB.size(); ++ib)
          for (size_t ir = 0; ir < nR.size(); ++ir)
            for (int s = 0; s < seeds; ++s) {
              Cell c{mode, dim, nA[ia], nB[ib], nR[ir], s, per_batch, 0, ""};
              c.seed = derive_seed(ctx.master_seed(), {hash_label(mode), static_cast<std::uint64_t>(dim), ia, ib, ir,
                                                       static_cast<std::uint64_t>(s)});
              c.id = mode + " dim=" + std::to_string(dim) + " normA=" + fmt(c.nA) + " normB=" + fmt(c.nB) +
                     " normRinv=" + fmt(c.nR) + " seed=" + std::to_string(s);
              cells.push_back(c);
            }
    }
  }
  if (cells.empty()) throw ConfigError("figure1: no cells configured");
  const double met_nD = cfg.has(S, "met.normD") ? cfg.num(S, "met.normD") : 1.0;

  std::vector<std::vector<std::string>> rows(cells.size());
  std::vector<CellRecord> recs(cells.size());
  parallel_for(static_cast<int>(cells.size()), ctx.jobs, [&](int i) {
    const Cell& c = cells[static_cast<size_t>(i)];
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::string> row{std::to_string(c.dim), fmt(c.nA), fmt(c.nB), fmt(c.nR), "", std::to_string(c.seed_index)};
    std::string status = "ok";
    Rng rng(c.seed);
    int total = 0, feasible = 0;
    try {
      const LinearSystem sys =
          c.mode == "met" ? gen_system_commuting(c.dim, c.nA, c.nB, met_nD, c.nR, cfg.num(S, "met.alpha"), rng)
                          : gen_system_unconstrained(c.dim, c.nA, c.nB, c.nR, rng);
      if (is_commuting(sys)) row[4] = fmt(alignment_factor(sys).alpha);
      const std::vector<TaskMatrix> tasks = gen_tasks(c.dim, static_cast<int>(c.per_batch), c.nA, rng);
      total = static_cast<int>(tasks.size());
      try {
        const LipschitzReport r = ratio_experiment(sys, tasks, ropt);
        feasible = r.tasks_feasible_safe;
        row.insert(row.end(), {fmt(r.L_unsafe), fmt(r.L_safe), fmt(r.ratio), fmt(r.lower_coefficient),
                               fmt(r.upper_bound_unsafe)});
      } catch (const ExperimentDegenerate& e) {
        const TeacherGains g = synthesize_teachers(sys, tasks, ropt.search);
        feasible = static_cast<int>(std::count_if(g.hinf.begin(), g.hinf.end(), [](const auto& k) { return k.has_value(); }));
        row.insert(row.end(), {"nan", "nan", "nan", fmt(separation_lower_coefficient(sys)),
                               fmt(lqr_lipschitz_upper_bound(sys, false))});
        status = std::string("degenerate: ") + e.what();
      }
    } catch (const std::exception& e) {
      row.resize(6);
      row.insert(row.end(), {"nan", "nan", "nan", "", ""});
      status = std::string("error: ") + e.what();
    }
    row.push_back(std::to_string(total));
    row.push_back(std::to_string(feasible));
    rows[static_cast<size_t>(i)] = std::move(row);
    recs[static_cast<size_t>(i)] = {c.id, c.seed, field(status),
                                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
  });
  ctx.cells = recs;

  int code = 0;
  for (const CellRecord& r : recs)
    if (r.status != "ok") code = 1;

  CsvTable summary;
  summary.header = {"mode",           "dim",          "normA",        "normB",          "normRinv",
                    "seeds",          "ratio_mean",   "ratio_std",    "ratio_log_mean", "ratio_log_std",
                    "ratio_min",      "lower_coeff_mean", "cells_ratio_above_one", "cells_ratio_above_bound"};
  for (const auto& [mode, dim] : panels) {
    CsvTable t;
    t.header = kFigure1Columns;
    for (size_t i = 0; i < cells.size(); ++i)
      if (cells[i].mode == mode && cells[i].dim == dim) t.add(rows[i]);
    const std::string stem = "figure1_" + mode + "_dim" + std::to_string(dim);
    ctx.write_csv(stem + ".csv", t);
    ctx.write_text(stem + ".svg", figure1_svg(t, mode == "met", "Lipschitz ratio, " + mode + " mode, dim " +
                                                                     std::to_string(dim)));
    for (const Figure1Group& g : figure1_groups(t)) {
      const Stats st = stats(g.ratio), lst = log_stats(g.ratio);
      double mn = std::numeric_limits<double>::infinity();
      int above_one = 0, above_bound = 0;
      for (size_t k = 0; k < g.ratio.size(); ++k) {
        mn = std::min(mn, std::isnan(g.ratio[k]) ? mn : g.ratio[k]);
        above_one += g.ratio[k] > 1.0;
        above_bound += std::isfinite(g.lower[k]) && g.ratio[k] >= g.lower[k];
      }
      summary.add({mode, std::to_string(dim), fmt(g.normA), fmt(g.normB), fmt(g.normRinv),
                   std::to_string(g.ratio.size()), fmt(st.mean), fmt(st.stddev), fmt(lst.mean), fmt(lst.stddev),
                   fmt(mn), fmt(stats(g.lower).mean), std::to_string(above_one), std::to_string(above_bound)});
    }
  }
  ctx.write_csv("figure1_summary.csv", summary);
  *ctx.out << summary.text();
  return code;
}

}  // namespace safegen::cli
