#pragma once

// Residual MLP with LayerNorm and tanh-GELU, reverse mode written out by hand.
//
// Layout for depth L >= 2:
//   h0 = W0 x + b0                               (embedding, no activation)
//   h_l = h_{l-1} + gelu(W_l LN(h_{l-1}) + b_l)  l = 1 .. L-2
//   y = W_head h_{L-2} + b_head
// depth 1 is a single affine map.
//
// All parameters live in one flat vector. Weight matrices are stored row-major
// inside it, which is also the checkpoint order.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "safegen/linalg.hpp"

namespace safegen::nn {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMajorMatrix>;
using ConstMatMap = Eigen::Map<const RowMajorMatrix>;
using VecMap = Eigen::Map<Vector>;
using ConstVecMap = Eigen::Map<const Vector>;

inline constexpr double kGeluC = 0.7978845608;
inline constexpr double kGeluA = 0.044715;
inline constexpr double kLayerNormEps = 1e-10;

inline double gelu(double x) {
  const double u = kGeluC * (x + kGeluA * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

inline double gelu_grad(double x) {
  const double u = kGeluC * (x + kGeluA * x * x * x);
  const double t = std::tanh(u);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

struct MlpShape {
  int input_dim = 0;
  int output_dim = 0;
  int width = 0;
  int depth = 3;
  bool operator==(const MlpShape&) const = default;
};

struct LayerSlots {
  bool norm = false;  // LayerNorm before the affine map
  bool act = false;   // GELU after it
  bool skip = false;  // identity skip around the block
  int in = 0, out = 0;
  Eigen::Index gain = -1, bias_ln = -1, weight = 0, bias = 0;
};

class MlpModel {
 public:
  MlpModel() = default;
  explicit MlpModel(const MlpShape& shape) : shape_(shape) {
    if (shape.input_dim < 1 || shape.output_dim < 1 || shape.depth < 1 || (shape.depth > 1 && shape.width < 1))
      throw InvalidInput("MlpModel: invalid shape");
    Eigen::Index off = 0;
    auto add = [&](int in, int out, bool norm, bool act, bool skip) {
      LayerSlots s;
      s.in = in;
      s.out = out;
      s.norm = norm;
      s.act = act;
      s.skip = skip && in == out;
      if (norm) {
        s.gain = off;
        off += in;
        s.bias_ln = off;
        off += in;
      }
      s.weight = off;
      off += static_cast<Eigen::Index>(in) * out;
      s.bias = off;
      off += out;
      layers_.push_back(s);
    };
    if (shape.depth == 1) {
      add(shape.input_dim, shape.output_dim, false, false, false);
    } else {
      add(shape.input_dim, shape.width, false, false, false);
      for (int l = 0; l < shape.depth - 2; ++l) add(shape.width, shape.width, true, true, true);
      add(shape.width, shape.output_dim, false, false, false);
    }
    params_ = Vector::Zero(off);
    for (const LayerSlots& s : layers_)
      if (s.norm) gain(s).setOnes();
  }

  const MlpShape& shape() const { return shape_; }
  const std::vector<LayerSlots>& layers() const { return layers_; }
  Eigen::Index num_params() const { return params_.size(); }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  MatMap weight(const LayerSlots& s) { return MatMap(params_.data() + s.weight, s.out, s.in); }
  ConstMatMap weight(const LayerSlots& s) const { return ConstMatMap(params_.data() + s.weight, s.out, s.in); }
  VecMap bias(const LayerSlots& s) { return VecMap(params_.data() + s.bias, s.out); }
  ConstVecMap bias(const LayerSlots& s) const { return ConstVecMap(params_.data() + s.bias, s.out); }
  VecMap gain(const LayerSlots& s) { return VecMap(params_.data() + s.gain, s.in); }
  ConstVecMap gain(const LayerSlots& s) const { return ConstVecMap(params_.data() + s.gain, s.in); }
  VecMap ln_bias(const LayerSlots& s) { return VecMap(params_.data() + s.bias_ln, s.in); }
  ConstVecMap ln_bias(const LayerSlots& s) const { return ConstVecMap(params_.data() + s.bias_ln, s.in); }

  /// Weights uniform in +-1/sqrt(fan_in); biases 0; norm gains 1.
  void initialize(std::uint64_t seed) {
    Rng rng(seed);
    params_.setZero();
    for (const LayerSlots& s : layers_) {
      const double lim = 1.0 / std::sqrt(static_cast<double>(s.in));
      std::uniform_real_distribution<double> u(-lim, lim);
      MatMap w = weight(s);
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
      if (s.norm) gain(s).setOnes();
    }
  }

 private:
  MlpShape shape_;
  std::vector<LayerSlots> layers_;
  Vector params_;
};

/// Intermediates of one forward pass; samples are columns.
struct ForwardCache {
  struct Layer {
    Matrix input;    // h_{l-1}
    Matrix xhat;     // normalized input (norm layers only)
    Vector inv_std;  // per column
    Matrix pre;      // affine output before the activation
  };
  std::vector<Layer> layers;
  Matrix output;
  const MlpModel* model = nullptr;
  Vector params_snapshot_head;  // first few parameters, to catch stale caches
};

namespace detail {

inline Vector param_fingerprint(const MlpModel& m) {
  const Eigen::Index k = std::min<Eigen::Index>(8, m.num_params());
  return m.params().head(k);
}

}  // namespace detail

/// inputs: input_dim x n. Returns output_dim x n.
inline Matrix mlp_forward(const MlpModel& model, const Matrix& inputs, ForwardCache* cache = nullptr) {
  if (inputs.rows() != model.shape().input_dim) throw InvalidInput("mlp_forward: input width mismatch");
  if (cache) {
    cache->layers.assign(model.layers().size(), {});
    cache->model = &model;
    cache->params_snapshot_head = detail::param_fingerprint(model);
  }
  Matrix h = inputs;
  for (size_t li = 0; li < model.layers().size(); ++li) {
    const LayerSlots& s = model.layers()[li];
    Matrix z;
    Matrix xhat;
    Vector inv_std;
    if (s.norm) {
      const Vector mean = h.colwise().mean().transpose();
      xhat = h.rowwise() - mean.transpose();
      inv_std = ((xhat.array().square().colwise().sum() / static_cast<double>(s.in)).transpose() + kLayerNormEps)
                    .rsqrt()
                    .matrix();
      xhat = xhat * inv_std.asDiagonal();
      z = (model.gain(s).asDiagonal() * xhat).colwise() + model.ln_bias(s);
    }
    const Matrix& zin = s.norm ? z : h;
    Matrix pre = model.weight(s) * zin;
    pre.colwise() += model.bias(s);
    Matrix out = s.act ? Matrix(pre.unaryExpr([](double v) { return gelu(v); })) : pre;
    if (s.skip) out += h;
    if (cache) {
      auto& c = cache->layers[li];
      c.input = std::move(h);
      c.xhat = std::move(xhat);
      c.inv_std = std::move(inv_std);
      c.pre = std::move(pre);
    }
    h = std::move(out);
  }
  if (cache) cache->output = h;
  return h;
}

/// Gradient of a scalar loss with respect to every parameter, given
/// dL/d(output) for the cached forward pass. Optionally also returns dL/dx.
inline Vector mlp_backward(const MlpModel& model, const ForwardCache& cache, const Matrix& grad_output,
                           Matrix* grad_input = nullptr) {
  if (cache.model != &model || cache.layers.size() != model.layers().size() ||
      cache.params_snapshot_head != detail::param_fingerprint(model))
    throw std::logic_error("mlp_backward: stale forward cache");
  if (grad_output.rows() != cache.output.rows() || grad_output.cols() != cache.output.cols())
    throw InvalidInput("mlp_backward: gradient shape mismatch");
  Vector grad = Vector::Zero(model.num_params());
  Matrix g = grad_output;  // dL/d(layer output)
  for (size_t li = model.layers().size(); li-- > 0;) {
    const LayerSlots& s = model.layers()[li];
    const auto& c = cache.layers[li];
    Matrix dpre = s.act ? Matrix(g.cwiseProduct(c.pre.unaryExpr([](double v) { return gelu_grad(v); }))) : g;
    // Affine.
    Matrix zin;
    if (s.norm)
      zin = (model.gain(s).asDiagonal() * c.xhat).colwise() + model.ln_bias(s);
    const Matrix& z = s.norm ? zin : c.input;
    MatMap(grad.data() + s.weight, s.out, s.in).noalias() = dpre * z.transpose();
    VecMap(grad.data() + s.bias, s.out) = dpre.rowwise().sum();
    Matrix dz = model.weight(s).transpose() * dpre;
    Matrix dh;
    if (s.norm) {
      VecMap(grad.data() + s.gain, s.in) = dz.cwiseProduct(c.xhat).rowwise().sum();
      VecMap(grad.data() + s.bias_ln, s.in) = dz.rowwise().sum();
      const Matrix dxhat = model.gain(s).asDiagonal() * dz;
      const double inv_n = 1.0 / static_cast<double>(s.in);
      const Eigen::RowVectorXd m1 = dxhat.colwise().sum() * inv_n;
      const Eigen::RowVectorXd m2 = dxhat.cwiseProduct(c.xhat).colwise().sum() * inv_n;
      dh = (dxhat.rowwise() - m1 - c.xhat.cwiseProduct(m2.replicate(s.in, 1))) * c.inv_std.asDiagonal();
    } else {
      dh = std::move(dz);
    }
    if (s.skip) dh += g;
    g = std::move(dh);
  }
  if (grad_input) *grad_input = std::move(g);
  return grad;
}

/// Mean of squared entries of (pred - target) and its gradient in pred.
inline double mse_loss(const Matrix& pred, const Matrix& target, Matrix* grad = nullptr) {
  const Matrix diff = pred - target;
  const double denom = static_cast<double>(diff.size());
  if (grad) *grad = diff * (2.0 / denom);
  return diff.squaredNorm() / denom;
}

}  // namespace safegen::nn
