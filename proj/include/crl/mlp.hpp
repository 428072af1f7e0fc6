#pragma once

// Fully-connected network with exact reverse-mode gradients and Adam.
// Templated on the scalar: training uses float, tests instantiate double for
// finite-difference verification. Batches are column-major: one column per
// sample.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "crl/rng.hpp"

namespace crl {

enum class Activation { kRelu, kTanh };
enum class OutputActivation { kIdentity, kTanhScaled };

template <typename Scalar>
class Mlp {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Mat W;  // out x in
    Vec b;
  };

  struct Cache {
    Mat input;
    std::vector<Mat> pre;   // pre-activation per layer
    std::vector<Mat> post;  // post-activation per layer
  };

  struct Grads {
    std::vector<Mat> dW;
    std::vector<Vec> db;

    void scale(Scalar s) {
      for (auto& g : dW) g *= s;
      for (auto& g : db) g *= s;
    }
  };

  std::vector<Layer> layers;
  Activation hidden_act = Activation::kRelu;
  OutputActivation out_act = OutputActivation::kIdentity;
  Scalar out_scale = 1;

  // Scaled uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static Mlp make(const std::vector<int>& sizes, Activation hidden,
                  OutputActivation out, Scalar out_scale, Rng& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("mlp: need >= 2 sizes");
    Mlp net;
    net.hidden_act = hidden;
    net.out_act = out;
    net.out_scale = out_scale;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      Layer l;
      l.W.resize(sizes[i + 1], sizes[i]);
      l.b = Vec::Zero(sizes[i + 1]);
      const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[i]));
      for (Eigen::Index r = 0; r < l.W.rows(); ++r)
        for (Eigen::Index c = 0; c < l.W.cols(); ++c)
          l.W(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
      net.layers.push_back(std::move(l));
    }
    return net;
  }

  int input_dim() const { return static_cast<int>(layers.front().W.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().W.rows()); }

  Mat forward(const Mat& x) const {
    Cache cache;
    return forward_cached(x, cache);
  }

  Vec forward(const Vec& x) const { return forward(Mat(x)); }

  Mat forward_cached(const Mat& x, Cache& cache) const {
    if (x.rows() != layers.front().W.cols())
      throw std::invalid_argument("mlp: input dim mismatch");
    cache.input = x;
    cache.pre.resize(layers.size());
    cache.post.resize(layers.size());
    const Mat* cur = &cache.input;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      cache.pre[i].noalias() = layers[i].W * (*cur);
      cache.pre[i].colwise() += layers[i].b;
      const bool last = i + 1 == layers.size();
      cache.post[i] = apply_activation(cache.pre[i], last);
      cur = &cache.post[i];
    }
    return cache.post.back();
  }

  Grads zero_grads() const {
    Grads g;
    for (const auto& l : layers) {
      g.dW.push_back(Mat::Zero(l.W.rows(), l.W.cols()));
      g.db.push_back(Vec::Zero(l.b.size()));
    }
    return g;
  }

  // Accumulates d(loss)/d(params) given upstream = d(loss)/d(output),
  // out_dim x batch. Optionally also returns d(loss)/d(input).
  void backward(const Cache& cache, const Mat& upstream, Grads& grads,
                Mat* dinput = nullptr) const {
    Mat delta = upstream;
    for (std::size_t ri = layers.size(); ri-- > 0;) {
      const bool last = ri + 1 == layers.size();
      delta = delta.cwiseProduct(activation_derivative(cache.pre[ri],
                                                       cache.post[ri], last));
      const Mat& below = ri == 0 ? cache.input : cache.post[ri - 1];
      grads.dW[ri].noalias() += delta * below.transpose();
      grads.db[ri] += delta.rowwise().sum();
      if (ri > 0 || dinput) {
        Mat next_delta;
        next_delta.noalias() = layers[ri].W.transpose() * delta;
        if (ri == 0) {
          *dinput = std::move(next_delta);
          return;
        }
        delta = std::move(next_delta);
      }
    }
  }

  std::vector<Scalar> flatten() const {
    std::vector<Scalar> out;
    for (const auto& l : layers) {
      out.insert(out.end(), l.W.data(), l.W.data() + l.W.size());
      out.insert(out.end(), l.b.data(), l.b.data() + l.b.size());
    }
    return out;
  }

  void unflatten(const std::vector<Scalar>& flat) {
    std::size_t pos = 0;
    for (auto& l : layers) {
      if (pos + l.W.size() + l.b.size() > flat.size())
        throw std::invalid_argument("mlp: parameter blob too short");
      std::copy(flat.data() + pos, flat.data() + pos + l.W.size(), l.W.data());
      pos += l.W.size();
      std::copy(flat.data() + pos, flat.data() + pos + l.b.size(), l.b.data());
      pos += l.b.size();
    }
    if (pos != flat.size())
      throw std::invalid_argument("mlp: parameter blob size mismatch");
  }

  std::vector<int> sizes() const {
    std::vector<int> s;
    s.push_back(input_dim());
    for (const auto& l : layers) s.push_back(static_cast<int>(l.W.rows()));
    return s;
  }

 private:
  Mat apply_activation(const Mat& z, bool last) const {
    if (last) {
      switch (out_act) {
        case OutputActivation::kIdentity: return z;
        case OutputActivation::kTanhScaled:
          return out_scale * z.array().tanh().matrix();
      }
    }
    switch (hidden_act) {
      case Activation::kRelu: return z.cwiseMax(Scalar(0));
      case Activation::kTanh: return z.array().tanh().matrix();
    }
    return z;
  }

  Mat activation_derivative(const Mat& z, const Mat& y, bool last) const {
    if (last) {
      switch (out_act) {
        case OutputActivation::kIdentity: return Mat::Ones(z.rows(), z.cols());
        case OutputActivation::kTanhScaled:
          // y = s tanh(z); dy/dz = s (1 - tanh(z)^2) = s - y^2/s
          return (Scalar(1) - (y / out_scale).array().square()).matrix() *
                 out_scale;
      }
    }
    switch (hidden_act) {
      case Activation::kRelu:
        return (z.array() > Scalar(0)).template cast<Scalar>().matrix();
      case Activation::kTanh:
        return (Scalar(1) - y.array().square()).matrix();
    }
    return Mat::Ones(z.rows(), z.cols());
  }
};

template <typename Scalar>
class Adam {
 public:
  using Mat = typename Mlp<Scalar>::Mat;
  using Vec = typename Mlp<Scalar>::Vec;

  explicit Adam(const Mlp<Scalar>& net, double lr, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& l : net.layers) {
      mW_.push_back(Mat::Zero(l.W.rows(), l.W.cols()));
      vW_.push_back(Mat::Zero(l.W.rows(), l.W.cols()));
      mb_.push_back(Vec::Zero(l.b.size()));
      vb_.push_back(Vec::Zero(l.b.size()));
    }
  }

  void step(Mlp<Scalar>& net, const typename Mlp<Scalar>::Grads& grads) {
    ++t_;
    const Scalar c1 = Scalar(1.0 / (1.0 - std::pow(beta1_, t_)));
    const Scalar c2 = Scalar(1.0 / (1.0 - std::pow(beta2_, t_)));
    const Scalar b1 = Scalar(beta1_), b2 = Scalar(beta2_);
    const Scalar lr = Scalar(lr_), eps = Scalar(eps_);
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      mW_[i] = b1 * mW_[i] + (Scalar(1) - b1) * grads.dW[i];
      vW_[i] = b2 * vW_[i].array().matrix() +
               (Scalar(1) - b2) * grads.dW[i].array().square().matrix();
      net.layers[i].W.array() -=
          lr * (mW_[i].array() * c1) / ((vW_[i].array() * c2).sqrt() + eps);
      mb_[i] = b1 * mb_[i] + (Scalar(1) - b1) * grads.db[i];
      vb_[i] = b2 * vb_[i].array().matrix() +
               (Scalar(1) - b2) * grads.db[i].array().square().matrix();
      net.layers[i].b.array() -=
          lr * (mb_[i].array() * c1) / ((vb_[i].array() * c2).sqrt() + eps);
    }
  }

  std::int64_t step_count() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<Mat> mW_, vW_;
  std::vector<Vec> mb_, vb_;
};

// theta_target <- tau * theta + (1 - tau) * theta_target
template <typename Scalar>
void soft_update(Mlp<Scalar>& target, const Mlp<Scalar>& online, Scalar tau) {
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    target.layers[i].W = tau * online.layers[i].W +
                         (Scalar(1) - tau) * target.layers[i].W;
    target.layers[i].b = tau * online.layers[i].b +
                         (Scalar(1) - tau) * target.layers[i].b;
  }
}

}  // namespace crl
