#pragma once

// Imitation experiments: a student MLP learns either teacher mapping, in the
// infinite-sample regime (Q -> K(Q)) or the finite-sample regime
// ((Q, x) -> K(Q) x). Both teachers see the same tasks, splits, states,
// initial weights and shuffling order.

#include "safegen/cli/context.hpp"
#include "safegen/nn/checkpoint.hpp"
#include "safegen/nn/imitation.hpp"

namespace safegen::cli {

inline const std::set<std::string> kTable1Keys = {
    "dim",          "regimes",  "teachers",  "seeds",           "control",         "width",          "depth",
    "lr",           "plateau_factor", "plateau_patience", "min_lr", "eval_every",   "loss_floor",     "rel_tol",
    "checkpoints",  "infinite.tasks", "infinite.max_epochs", "infinite.batch", "finite.tasks", "finite.max_epochs",
    "finite.batch"};

/// The bold-face rule: a mean is significant when it lies below its
/// counterpart's mean minus the sum of both standard deviations.
inline bool significantly_below(const Stats& a, const Stats& b) {
  return std::isfinite(a.mean) && std::isfinite(b.mean) && a.mean < b.mean - (a.stddev + b.stddev);
}

inline int run_table1(RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  const std::string S = "table1";
  cfg.check_keys(S, kTable1Keys);
  const int dim = static_cast<int>(cfg.integer(S, "dim"));
  if (dim < 1) throw ConfigError("[table1] dim must be >= 1");
  const long seeds = cfg.integer(S, "seeds");
  if (seeds < 1) throw ConfigError("[table1] seeds must be >= 1");
  const bool control = cfg.flag(S, "control", false);
  const bool checkpoints = cfg.flag(S, "checkpoints", false);
  const int width = static_cast<int>(cfg.integer(S, "width")), depth = static_cast<int>(cfg.integer(S, "depth"));
  GammaSearchOptions search;
  search.rel_tol = cfg.num(S, "rel_tol", 1e-4);

  std::vector<std::string> regimes = cfg.list(S, "regimes"), teachers = cfg.list(S, "teachers");
  for (const auto& r : regimes)
    if (r != "infinite" && r != "finite") throw ConfigError("[table1] regimes: unknown regime '" + r + "'");
  for (const auto& t : teachers)
    if (t != "safe" && t != "unsafe") throw ConfigError("[table1] teachers: unknown teacher '" + t + "'");
  if (regimes.empty() || teachers.empty()) throw ConfigError("[table1] empty regime or teacher list");

  auto train_config = [&](const std::string& regime) {
    nn::TrainConfig c;
    c.learning_rate = cfg.num(S, "lr");
    c.plateau_factor = cfg.num(S, "plateau_factor");
    c.plateau_patience = static_cast<int>(cfg.integer(S, "plateau_patience"));
    c.min_lr = cfg.num(S, "min_lr");
    c.eval_every = static_cast<int>(cfg.integer(S, "eval_every"));
    c.loss_floor = cfg.num(S, "loss_floor");
    c.max_epochs = static_cast<int>(cfg.integer(S, regime + ".max_epochs"));
    c.batch_size = static_cast<int>(cfg.integer(S, regime + ".batch"));
    try {
      nn::validate(c);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("[table1] ") + e.what());
    }
    return c;
  };

  // Teacher tables, one per (regime, seed).
  struct Group {
    std::string regime;
    int seed_index;
    std::uint64_t seed;
    nn::TeacherTable table;
    std::string error;
  };
  std::vector<Group> groups;
  for (const auto& r : regimes) {
    const long tasks = cfg.integer(S, r + ".tasks");
    if (tasks < 2) throw ConfigError("[table1] " + r + ".tasks must be >= 2");
    train_config(r);
    for (int s = 0; s < seeds; ++s)
      groups.push_back({r, s, derive_seed(ctx.master_seed(), {hash_label(r), static_cast<std::uint64_t>(s)}), {}, ""});
  }
  parallel_for(static_cast<int>(groups.size()), ctx.jobs, [&](int i) {
    Group& g = groups[static_cast<size_t>(i)];
    try {
      Rng rng(derive_seed(g.seed, {1}));
      const LinearSystem sys = gen_system_lq_experiments(dim, rng);
      const auto tasks = gen_tasks_lq(dim, static_cast<int>(cfg.integer(S, g.regime + ".tasks")), rng);
      g.table = nn::build_teacher_table(sys, tasks, search);
      if (g.table.kept.size() < 2) g.error = "fewer than two usable tasks";
    } catch (const std::exception& e) {
      g.error = e.what();
    }
  });

  struct Run {
    size_t group;
    std::string teacher;
    std::vector<std::string> row;
    nn::TrainHistory hist;
    CellRecord rec;
  };
  std::vector<Run> runs;
  for (size_t gi = 0; gi < groups.size(); ++gi)
    for (const auto& t : teachers) runs.push_back({gi, t, {}, {}, {}});

  parallel_for(static_cast<int>(runs.size()), ctx.jobs, [&](int i) {
    Run& run = runs[static_cast<size_t>(i)];
    const Group& g = groups[run.group];
    const auto start = std::chrono::steady_clock::now();
    const bool finite = g.regime == "finite";
    run.rec.id = g.regime + " " + run.teacher + " seed=" + std::to_string(g.seed_index);
    run.rec.seed = g.seed;
    run.row = {g.regime, run.teacher, std::to_string(g.seed_index), std::to_string(g.table.kept.size()),
               std::to_string(g.table.dropped)};
    std::string status = "ok";
    try {
      if (!g.error.empty()) throw std::runtime_error(g.error);
      const nn::Teacher teacher = (run.teacher == "safe" && !control) ? nn::Teacher::safe : nn::Teacher::unsafe;
      const nn::ImitationDataset ds =
          finite ? nn::build_finite_sample_dataset(g.table, teacher, derive_seed(g.seed, {2}), derive_seed(g.seed, {3}))
                 : nn::build_infinite_sample_dataset(g.table, teacher, derive_seed(g.seed, {2}));
      nn::MlpModel model(nn::MlpShape{static_cast<int>(ds.train.X.rows()), static_cast<int>(ds.train.Y.rows()),
                                      width, depth});
      model.initialize(derive_seed(g.seed, {4}));
      run.hist = nn::train(model, ds, train_config(g.regime), derive_seed(g.seed, {5}));
      const double tr = nn::eval_normalized_mse(model, ds.train, finite);
      const double seen = finite ? nn::eval_normalized_mse(model, ds.eval_seen, true) : std::nan("");
      const double te = nn::eval_normalized_mse(model, ds.eval_unseen, finite);
      run.row.insert(run.row.end(), {fmt(run.hist.final_train_loss), fmt(tr), finite ? fmt(seen) : "", fmt(te),
                                     std::to_string(run.hist.epochs), nn::to_string(run.hist.stop)});
      if (checkpoints) {
        nlohmann::json side;
        side["shape"] = {{"input_dim", model.shape().input_dim}, {"output_dim", model.shape().output_dim},
                         {"width", width}, {"depth", depth}};
        side["layout"] = "embed affine; (depth-2) x [layernorm, affine, gelu-tanh, skip]; affine head";
        side["config"] = ctx.cfg.text();
        side["regime"] = g.regime;
        side["teacher"] = run.teacher;
        side["seed"] = g.seed;
        side["epochs"] = run.hist.epochs;
        side["stop"] = nn::to_string(run.hist.stop);
        side["epoch_loss"] = run.hist.epoch_loss;
        side["lr_trace"] = run.hist.lr_trace;
        const std::string name =
            "ckpt_" + g.regime + "_" + run.teacher + "_seed" + std::to_string(g.seed_index) + ".bin";
        nn::save_checkpoint(ctx.path(name), model, side.dump(2));
      }
    } catch (const nn::TrainingDiverged& e) {
      status = std::string("diverged: ") + e.what();
    } catch (const std::exception& e) {
      status = std::string("error: ") + e.what();
    }
    if (status != "ok") {
      run.row.resize(5);
      run.row.insert(run.row.end(), {"nan", "nan", finite ? "nan" : "", "nan", std::to_string(run.hist.epochs), ""});
    }
    run.row.push_back(field(status));
    run.rec.status = field(status);
    run.rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  CsvTable t, hist, summary;
  t.header = {"regime",       "teacher",        "seed",           "tasks_kept", "tasks_dropped", "train_loss",
              "train_error",  "theta_tr_error", "theta_te_error", "epochs",     "stop",          "status"};
  hist.header = {"regime", "teacher", "seed", "epoch", "train_loss", "lr", "err_seen", "err_unseen"};
  int code = 0;
  for (const Run& r : runs) {
    t.add(r.row);
    ctx.cells.push_back(r.rec);
    if (r.rec.status != "ok") code = 1;
    const Group& g = groups[r.group];
    for (const nn::EvalPoint& e : r.hist.evals)
      hist.add({g.regime, r.teacher, std::to_string(g.seed_index), std::to_string(e.epoch), fmt(e.train_loss),
                fmt(e.lr), fmt(e.err_seen), fmt(e.err_unseen)});
  }
  if (checkpoints)
    for (const Run& r : runs)
      if (r.rec.status == "ok") {
        const Group& g = groups[r.group];
        const std::string name = "ckpt_" + g.regime + "_" + r.teacher + "_seed" + std::to_string(g.seed_index) + ".bin";
        ctx.outputs.push_back(name);
        ctx.outputs.push_back(name + ".json");
      }

  summary.header = {"regime",         "teacher",           "seeds",          "train_error_mean", "train_error_std",
                    "theta_tr_mean",  "theta_tr_std",      "theta_te_mean",  "theta_te_std",     "train_error_significant",
                    "theta_tr_significant", "theta_te_significant"};
  const char* metrics[] = {"train_error", "theta_tr_error", "theta_te_error"};
  for (const auto& regime : regimes) {
    std::map<std::string, std::array<Stats, 3>> st;
    for (const auto& teacher : teachers)
      for (int m = 0; m < 3; ++m) {
        std::vector<double> v;
        const int c = t.column(metrics[m]);
        for (const auto& row : t.rows)
          if (row[0] == regime && row[1] == teacher) v.push_back(cell_num(row[static_cast<size_t>(c)]));
        st[teacher][static_cast<size_t>(m)] = stats(v);
      }
    for (const auto& teacher : teachers) {
      const auto& a = st[teacher];
      std::vector<std::string> row{regime, teacher, std::to_string(seeds)};
      for (int m = 0; m < 3; ++m) {
        const bool empty = m == 1 && regime == "infinite";
        row.push_back(empty ? "" : fmt(a[static_cast<size_t>(m)].mean));
        row.push_back(empty ? "" : fmt(a[static_cast<size_t>(m)].stddev));
      }
      for (int m = 0; m < 3; ++m) {
        const std::string other = teacher == "safe" ? "unsafe" : "safe";
        if ((m == 1 && regime == "infinite") || !st.count(other)) {
          row.push_back("");
          continue;
        }
        row.push_back(significantly_below(a[static_cast<size_t>(m)], st[other][static_cast<size_t>(m)]) ? "true"
                                                                                                          : "false");
      }
      summary.add(row);
    }
  }
  ctx.write_csv("table1.csv", t);
  ctx.write_csv("table1_history.csv", hist);
  ctx.write_csv("table1_summary.csv", summary);
  *ctx.out << summary.text();
  return code;
}

}  // namespace safegen::cli
