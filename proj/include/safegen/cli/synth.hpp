#pragma once

#include "safegen/cli/context.hpp"
#include "safegen/hinf.hpp"

namespace safegen::cli {

inline std::vector<std::string> gain_columns(const std::string& name, int dim) {
  if (dim == 1) return {name};
  std::vector<std::string> c;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) c.push_back(name + "_" + std::to_string(i + 1) + std::to_string(j + 1));
  return c;
}

/// `tasks` holds ';'-separated entries, each either one number q (meaning
/// q I) or dim^2 row-major entries.
inline std::vector<Matrix> parse_task_list(const Config& cfg, const std::string& section, int dim) {
  std::vector<Matrix> out;
  if (!cfg.has(section, "tasks")) return out;
  const Config::Entry& e = cfg.entry(section, "tasks");
  if (trim(e.value).empty()) return out;
  for (const std::string& item : split(e.value, ';')) {
    std::vector<double> v;
    for (const std::string& s : split(item, ',')) {
      char* end = nullptr;
      const double d = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size())
        throw ConfigError(e.origin + ": [" + section + "] tasks: expected a number, got '" + s + "'");
      v.push_back(d);
    }
    if (v.size() == 1)
      out.push_back(v[0] * Matrix::Identity(dim, dim));
    else if (static_cast<int>(v.size()) == dim * dim)
      out.push_back(unflatten_row_major(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())), dim, dim));
    else
      throw ConfigError(e.origin + ": [" + section + "] tasks: entry has " + std::to_string(v.size()) +
                        " numbers, expected 1 or " + std::to_string(dim * dim));
  }
  return out;
}

inline int run_synth(RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  std::set<std::string> keys = kSystemKeys;
  keys.insert({"tasks", "random_tasks", "hinf", "rel_tol"});
  cfg.check_keys("synth", keys);
  const LinearSystem sys = build_system(cfg, "synth", ctx.master_seed());
  const int dim = sys.dim();
  std::vector<Matrix> tasks = parse_task_list(cfg, "synth", dim);
  const long extra = cfg.integer("synth", "random_tasks", 0);
  if (extra < 0) throw ConfigError("[synth] random_tasks must be non-negative");
  if (extra > 0) {
    Rng rng(derive_seed(ctx.master_seed(), {hash_label("tasks")}));
    for (const TaskMatrix& q : gen_tasks_lq(dim, static_cast<int>(extra), rng)) tasks.push_back(q.Q());
  }
  if (tasks.empty()) throw ConfigError("synth: empty task list (set [synth] tasks or random_tasks)");
  const bool hinf = cfg.flag("synth", "hinf", true);
  GammaSearchOptions search;
  search.rel_tol = cfg.num("synth", "rel_tol", 1e-4);

  CsvTable t;
  t.header = {"task", "q_fro"};
  for (auto& c : gain_columns("k_lqr", dim)) t.header.push_back(c);
  t.header.push_back("dare_residual");
  if (hinf) {
    t.header.insert(t.header.end(), {"feasible", "gamma_star"});
    for (auto& c : gain_columns("k_inf", dim)) t.header.push_back(c);
    t.header.push_back("dgare_residual");
  }
  t.header.push_back("status");

  std::vector<std::vector<std::string>> rows(tasks.size());
  std::vector<CellRecord> cells(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), ctx.jobs, [&](int i) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::string> row{std::to_string(i), fmt(tasks[static_cast<size_t>(i)].norm())};
    const size_t gains = static_cast<size_t>(dim * dim);
    std::string status = "ok";
    try {
      const TaskMatrix Q(tasks[static_cast<size_t>(i)]);
      const RiccatiSolution dare = solve_dare(sys, Q);
      const Vector k = flatten_row_major(lqr_gain(sys, dare.P));
      for (Eigen::Index j = 0; j < k.size(); ++j) row.push_back(fmt(k(j)));
      row.push_back(fmt(dare.residual));
      if (!dare.converged) status = "dare-not-converged";
      if (hinf) {
        try {
          const HinfSynthesis h = gamma_star(sys, Q, search);
          row.insert(row.end(), {"true", fmt(h.gamma_star)});
          const Vector ki = flatten_row_major(h.Ku);
          for (Eigen::Index j = 0; j < ki.size(); ++j) row.push_back(fmt(ki(j)));
          double res = 0.0;
          if (h.gamma_star > 0.0) res = (dgare_operator(sys, Q, h.gamma_star, h.P) - h.P).norm();
          row.push_back(fmt(res));
        } catch (const InfeasibleTask& e) {
          row.insert(row.end(), {"false", ""});
          row.insert(row.end(), gains + 1, "");
          status = std::string("infeasible: ") + e.what();
        }
      }
    } catch (const std::exception& e) {
      row.resize(2);
      row.insert(row.end(), gains + 1, "");
      if (hinf) row.insert(row.end(), gains + 3, "");
      status = std::string("error: ") + e.what();
    }
    row.push_back(field(status));
    rows[static_cast<size_t>(i)] = std::move(row);
    cells[static_cast<size_t>(i)] = {"task " + std::to_string(i), ctx.master_seed(), status,
                                     std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
  });
  int code = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    t.add(rows[i]);
    if (cells[i].status.rfind("error", 0) == 0 || cells[i].status == "dare-not-converged") code = 1;
  }
  ctx.cells = cells;
  ctx.write_csv("synth.csv", t);
  if (ctx.json)
    *ctx.out << t.to_json().dump(2) << "\n";
  else
    *ctx.out << t.text();
  return code;
}

}  // namespace safegen::cli
