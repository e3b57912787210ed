#pragma once

// Imitation datasets built from the two teachers, the training loop and the
// normalized error metric.

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "safegen/lipschitz.hpp"
#include "safegen/nn/adam.hpp"
#include "safegen/nn/mlp.hpp"

namespace safegen::nn {

enum class Teacher { safe, unsafe };

inline const char* to_string(Teacher t) { return t == Teacher::safe ? "safe" : "unsafe"; }

/// Samples are columns.
struct DataSplit {
  Matrix X;
  Matrix Y;
  std::vector<int> task_ids;
  Eigen::Index size() const { return X.cols(); }
};

struct ImitationDataset {
  DataSplit train;
  DataSplit eval_seen;
  DataSplit eval_unseen;
  std::vector<int> train_tasks;  // indices into the original task list
  std::vector<int> test_tasks;
  bool finite_sample = false;
};

/// Both teachers evaluated on one task list. Tasks where either teacher
/// failed are dropped so the two datasets stay matched.
struct TeacherTable {
  std::vector<int> kept;  // original task indices
  std::vector<Matrix> Q;
  std::vector<Matrix> K_safe;
  std::vector<Matrix> K_unsafe;
  int dropped = 0;
};

inline TeacherTable build_teacher_table(const LinearSystem& sys, const std::vector<TaskMatrix>& tasks,
                                        const GammaSearchOptions& search = {}, int jobs = 1) {
  const TeacherGains g = synthesize_teachers(sys, tasks, search, jobs);
  TeacherTable t;
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (!g.lqr[i] || !g.hinf[i]) {
      ++t.dropped;
      continue;
    }
    t.kept.push_back(static_cast<int>(i));
    t.Q.push_back(tasks[i].Q());
    t.K_safe.push_back(*g.hinf[i]);
    t.K_unsafe.push_back(*g.lqr[i]);
  }
  return t;
}

namespace detail {

struct TaskSplit {
  std::vector<int> train;  // positions in TeacherTable
  std::vector<int> test;
};

inline TaskSplit split_tasks(int n, std::uint64_t split_seed, double train_fraction = 0.8) {
  if (n < 2) throw InvalidInput("imitation dataset: need at least two usable tasks");
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(split_seed);
  std::shuffle(order.begin(), order.end(), rng);
  int n_train = static_cast<int>(std::lround(train_fraction * n));
  n_train = std::clamp(n_train, 1, n - 1);
  TaskSplit s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.test.assign(order.begin() + n_train, order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

inline const Matrix& teacher_gain(const TeacherTable& t, Teacher which, int pos) {
  return which == Teacher::safe ? t.K_safe[static_cast<size_t>(pos)] : t.K_unsafe[static_cast<size_t>(pos)];
}

inline DataSplit gain_split(const TeacherTable& t, Teacher which, const std::vector<int>& positions) {
  const Eigen::Index d2 = t.Q[0].size();
  DataSplit s{Matrix(d2, static_cast<Eigen::Index>(positions.size())),
              Matrix(d2, static_cast<Eigen::Index>(positions.size())), {}};
  for (size_t c = 0; c < positions.size(); ++c) {
    const int p = positions[c];
    s.X.col(static_cast<Eigen::Index>(c)) = flatten_row_major(t.Q[static_cast<size_t>(p)]);
    s.Y.col(static_cast<Eigen::Index>(c)) = flatten_row_major(teacher_gain(t, which, p));
    s.task_ids.push_back(t.kept[static_cast<size_t>(p)]);
  }
  return s;
}

}  // namespace detail

/// Input vec(Q), target vec(K(Q)), row-major flattening.
inline ImitationDataset build_infinite_sample_dataset(const TeacherTable& table, Teacher teacher,
                                                      std::uint64_t split_seed) {
  const detail::TaskSplit split = detail::split_tasks(static_cast<int>(table.kept.size()), split_seed);
  ImitationDataset ds;
  ds.train = detail::gain_split(table, teacher, split.train);
  ds.eval_seen = ds.train;
  ds.eval_unseen = detail::gain_split(table, teacher, split.test);
  for (int p : split.train) ds.train_tasks.push_back(table.kept[static_cast<size_t>(p)]);
  for (int p : split.test) ds.test_tasks.push_back(table.kept[static_cast<size_t>(p)]);
  return ds;
}

struct FiniteSampleCounts {
  int train_states = 0;  // per training task; 0 means 4 dim^2
  int seen_states = 0;   // per training task; 0 means dim
  int test_states = 0;   // per test task; 0 means 4 dim^2
};

/// Input [vec(Q); x], target K(Q) x with x ~ N(0, I). The state draws depend
/// only on `state_seed` and the split, never on the teacher.
inline ImitationDataset build_finite_sample_dataset(const TeacherTable& table, Teacher teacher,
                                                    std::uint64_t split_seed, std::uint64_t state_seed,
                                                    FiniteSampleCounts counts = {}) {
  const detail::TaskSplit split = detail::split_tasks(static_cast<int>(table.kept.size()), split_seed);
  const int dim = static_cast<int>(table.Q[0].rows());
  if (counts.train_states <= 0) counts.train_states = 4 * dim * dim;
  if (counts.seen_states <= 0) counts.seen_states = dim;
  if (counts.test_states <= 0) counts.test_states = 4 * dim * dim;
  Rng rng(state_seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  auto make = [&](const std::vector<int>& positions, int per_task) {
    const Eigen::Index n = static_cast<Eigen::Index>(positions.size()) * per_task;
    DataSplit s{Matrix(dim * dim + dim, n), Matrix(dim, n), {}};
    Eigen::Index c = 0;
    for (int p : positions) {
      const Vector q = flatten_row_major(table.Q[static_cast<size_t>(p)]);
      const Matrix& K = detail::teacher_gain(table, teacher, p);
      for (int k = 0; k < per_task; ++k, ++c) {
        Vector x(dim);
        for (int i = 0; i < dim; ++i) x(i) = n01(rng);
        s.X.col(c).head(dim * dim) = q;
        s.X.col(c).tail(dim) = x;
        s.Y.col(c) = K * x;
        s.task_ids.push_back(table.kept[static_cast<size_t>(p)]);
      }
    }
    return s;
  };
  ImitationDataset ds;
  ds.finite_sample = true;
  ds.train = make(split.train, counts.train_states);
  ds.eval_seen = make(split.train, counts.seen_states);
  ds.eval_unseen = make(split.test, counts.test_states);
  for (int p : split.train) ds.train_tasks.push_back(table.kept[static_cast<size_t>(p)]);
  for (int p : split.test) ds.test_tasks.push_back(table.kept[static_cast<size_t>(p)]);
  return ds;
}

/// 1e4 times the mean of ||yhat - y||^2 / (||y||^2 + eps). With
/// `group_by_task` samples are averaged within each task first.
inline double normalized_error(const Matrix& pred, const DataSplit& split, bool group_by_task, double eps = 1e-12) {
  if (split.size() == 0) throw InvalidInput("eval_normalized_mse: empty split");
  const Vector per = ((pred - split.Y).colwise().squaredNorm().array() /
                      (split.Y.colwise().squaredNorm().array() + eps))
                         .matrix()
                         .transpose();
  if (!group_by_task) return 1e4 * per.mean();
  std::vector<std::pair<int, double>> rows;
  rows.reserve(per.size());
  for (Eigen::Index i = 0; i < per.size(); ++i) rows.emplace_back(split.task_ids[static_cast<size_t>(i)], per(i));
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  int groups = 0;
  for (size_t i = 0; i < rows.size();) {
    size_t j = i;
    double s = 0.0;
    while (j < rows.size() && rows[j].first == rows[i].first) s += rows[j++].second;
    total += s / static_cast<double>(j - i);
    ++groups;
    i = j;
  }
  return 1e4 * total / groups;
}

inline double eval_normalized_mse(const MlpModel& model, const DataSplit& split, bool group_by_task) {
  if (split.size() == 0) throw InvalidInput("eval_normalized_mse: empty split");
  return normalized_error(mlp_forward(model, split.X), split, group_by_task);
}

struct TrainConfig {
  double learning_rate = 1e-5;
  double plateau_factor = 0.1;
  int plateau_patience = 30;
  double plateau_threshold = 1e-4;  // relative improvement that resets patience
  double min_lr = 1e-9;
  int eval_every = 25;
  int max_epochs = 3000;
  int batch_size = 256;
  double loss_floor = 1e-5;
  double stall_improvement = 0.01;
  int stall_checks = 5;
};

enum class StopReason { loss_floor, plateau_stall, lr_floor, epoch_cap };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::loss_floor: return "loss-floor";
    case StopReason::plateau_stall: return "plateau-stall";
    case StopReason::lr_floor: return "lr-floor";
    case StopReason::epoch_cap: return "epoch-cap";
  }
  return "?";
}

struct EvalPoint {
  int epoch = 0;
  double train_loss = 0.0;
  double lr = 0.0;
  double err_seen = 0.0;
  double err_unseen = 0.0;
};

struct TrainHistory {
  std::vector<double> epoch_loss;
  std::vector<double> lr_trace;  // lr used in each epoch
  std::vector<EvalPoint> evals;
  StopReason stop = StopReason::epoch_cap;
  int epochs = 0;
  double final_train_loss = 0.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

inline void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0 && c.plateau_factor > 0.0 && c.plateau_factor < 1.0 && c.min_lr > 0.0 &&
        c.plateau_patience >= 1 && c.eval_every >= 1 && c.max_epochs >= 1 && c.batch_size >= 1 &&
        c.loss_floor >= 0.0 && c.stall_checks >= 1))
    throw InvalidInput("TrainConfig: invalid values");
}

/// Minibatch Adam on the mean squared error. Shuffling is driven by `seed`;
/// the model must already be initialized.
inline TrainHistory train(MlpModel& model, const ImitationDataset& ds, const TrainConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const DataSplit& tr = ds.train;
  const Eigen::Index n = tr.size();
  if (n == 0) throw InvalidInput("train: empty training split");
  Rng rng(seed);
  AdamState adam(model.num_params());
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  TrainHistory hist;
  double lr = cfg.learning_rate;
  int lr_drops = 0;
  double plateau_best = std::numeric_limits<double>::infinity();
  int plateau_bad = 0;
  double stall_best = std::numeric_limits<double>::infinity();
  int stall_count = 0;
  const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, n);
  ForwardCache cache;
  Matrix xb, yb, grad_out;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    Eigen::Index seen = 0;
    for (Eigen::Index start = 0; start < n; start += bs) {
      const Eigen::Index m = std::min(bs, n - start);
      xb.resize(tr.X.rows(), m);
      yb.resize(tr.Y.rows(), m);
      for (Eigen::Index c = 0; c < m; ++c) {
        xb.col(c) = tr.X.col(order[static_cast<size_t>(start + c)]);
        yb.col(c) = tr.Y.col(order[static_cast<size_t>(start + c)]);
      }
      const Matrix pred = mlp_forward(model, xb, &cache);
      const double loss = mse_loss(pred, yb, &grad_out);
      const Vector grad = mlp_backward(model, cache, grad_out);
      adam_step(adam, model.params(), grad, lr);
      loss_sum += loss * static_cast<double>(m);
      seen += m;
    }
    const double epoch_loss = loss_sum / static_cast<double>(seen);
    if (!std::isfinite(epoch_loss) || !model.params().allFinite()) throw TrainingDiverged(epoch);
    hist.epoch_loss.push_back(epoch_loss);
    hist.lr_trace.push_back(lr);
    hist.epochs = epoch;
    hist.final_train_loss = epoch_loss;

    if (epoch % cfg.eval_every == 0) {
      EvalPoint ep;
      ep.epoch = epoch;
      ep.train_loss = epoch_loss;
      ep.lr = lr;
      ep.err_seen = eval_normalized_mse(model, ds.eval_seen, ds.finite_sample);
      ep.err_unseen = eval_normalized_mse(model, ds.eval_unseen, ds.finite_sample);
      hist.evals.push_back(ep);
      if (epoch_loss < stall_best * (1.0 - cfg.stall_improvement)) {
        stall_best = epoch_loss;
        stall_count = 0;
      } else if (++stall_count >= cfg.stall_checks) {
        hist.stop = StopReason::plateau_stall;
        return hist;
      }
    }
    if (epoch_loss < cfg.loss_floor) {
      hist.stop = StopReason::loss_floor;
      return hist;
    }
    // Reduce-on-plateau on the epoch loss.
    if (epoch_loss < plateau_best * (1.0 - cfg.plateau_threshold)) {
      plateau_best = epoch_loss;
      plateau_bad = 0;
    } else if (++plateau_bad > cfg.plateau_patience) {
      ++lr_drops;
      lr = cfg.learning_rate * std::pow(cfg.plateau_factor, lr_drops);
      plateau_bad = 0;
      if (lr < cfg.min_lr * (1.0 - 1e-9)) {
        hist.stop = StopReason::lr_floor;
        return hist;
      }
    }
  }
  hist.stop = StopReason::epoch_cap;
  return hist;
}

}  // namespace safegen::nn
