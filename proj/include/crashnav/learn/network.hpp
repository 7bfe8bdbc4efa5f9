#pragma once

#include "crashnav/learn/image.hpp"
#include "crashnav/learn/net_spec.hpp"
#include "crashnav/world/render.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace crashnav::learn {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weights and biases per layer; parameter-free layers hold empty tensors.
/// Conv weights are out_channels x (in_channels * k * k) with columns ordered
/// (channel, ky, kx); dense weights are out x in.
template <typename Scalar>
struct NetworkParams {
  NetSpec spec;
  std::uint64_t init_seed = 0;
  std::vector<Mat<Scalar>> weights;
  std::vector<Vec<Scalar>> biases;

  static NetworkParams zeros(const NetSpec& spec) {
    const auto shapes = spec.shapes();
    NetworkParams p;
    p.spec = spec;
    p.weights.resize(spec.layers.size());
    p.biases.resize(spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      const LayerSpec& l = spec.layers[i];
      if (l.kind == LayerSpec::Kind::Conv) {
        p.weights[i] = Mat<Scalar>::Zero(l.out, shapes[i].channels * l.kernel * l.kernel);
        p.biases[i] = Vec<Scalar>::Zero(l.out);
      } else if (l.kind == LayerSpec::Kind::Dense) {
        p.weights[i] = Mat<Scalar>::Zero(l.out, shapes[i].size());
        p.biases[i] = Vec<Scalar>::Zero(l.out);
      }
    }
    return p;
  }

  /// He-scaled Gaussian weights (std = sqrt(2 / fan_in)), zero biases.
  static NetworkParams he_init(const NetSpec& spec, std::uint64_t seed) {
    NetworkParams p = zeros(spec);
    p.init_seed = seed;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& w : p.weights) {
      if (w.size() == 0) continue;
      const double scale = std::sqrt(2.0 / static_cast<double>(w.cols()));
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(scale * gauss(rng));
    }
    return p;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
    return n;
  }

  bool all_finite() const {
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (!weights[i].allFinite() || !biases[i].allFinite()) return false;
    return true;
  }

  /// Flat view used by gradient checks and serialization: for each layer,
  /// weights (column-major) then biases.
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i].size() == 0) continue;
      fn(weights[i].data(), static_cast<std::size_t>(weights[i].size()));
      fn(biases[i].data(), static_cast<std::size_t>(biases[i].size()));
    }
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i].size() == 0) continue;
      fn(weights[i].data(), static_cast<std::size_t>(weights[i].size()));
      fn(biases[i].data(), static_cast<std::size_t>(biases[i].size()));
    }
  }

  Scalar& flat(std::size_t index) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const auto nw = static_cast<std::size_t>(weights[i].size());
      if (index < nw) return weights[i].data()[index];
      index -= nw;
      const auto nb = static_cast<std::size_t>(biases[i].size());
      if (index < nb) return biases[i].data()[index];
      index -= nb;
    }
    throw std::out_of_range("NetworkParams::flat");
  }

  template <typename Other>
  NetworkParams<Other> cast() const {
    NetworkParams<Other> out;
    out.spec = spec;
    out.init_seed = init_seed;
    for (const auto& w : weights) out.weights.push_back(w.template cast<Other>());
    for (const auto& b : biases) out.biases.push_back(b.template cast<Other>());
    return out;
  }

  void set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
  }
};

/// Activations of every layer for one batch, kept for backpropagation.
/// Spatial activations are channels x (batch * height * width) with each
/// sample's pixels contiguous and row-major; flat ones are features x batch.
template <typename Scalar>
struct ForwardCache {
  int batch = 0;
  std::vector<Shape> shapes;
  std::vector<Mat<Scalar>> acts;  // acts[0] is the input, acts[i + 1] the output of layer i
  std::vector<Mat<Scalar>> cols;  // im2col buffers of conv layers
  std::vector<std::vector<Eigen::Index>> argmax;  // max-pool winners (flat index into the input)
};

namespace detail {

template <typename Scalar>
void im2col(const Mat<Scalar>& in, const Shape& s, int batch, int k, int stride, const Shape& o, Mat<Scalar>& cols) {
  const int hw = s.spatial();
  const int ohw = o.spatial();
  cols.resize(static_cast<Eigen::Index>(s.channels) * k * k, static_cast<Eigen::Index>(batch) * ohw);
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < s.channels; ++c)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          const Eigen::Index row = (static_cast<Eigen::Index>(c) * k + ky) * k + kx;
          for (int oy = 0; oy < o.height; ++oy) {
            const Scalar* src = in.data() + static_cast<Eigen::Index>(c) +
                                in.rows() * (static_cast<Eigen::Index>(b) * hw +
                                             static_cast<Eigen::Index>(oy * stride + ky) * s.width + kx);
            const Eigen::Index col0 = static_cast<Eigen::Index>(b) * ohw + static_cast<Eigen::Index>(oy) * o.width;
            for (int ox = 0; ox < o.width; ++ox) cols(row, col0 + ox) = src[in.rows() * ox * stride];
          }
        }
}

template <typename Scalar>
void col2im(const Mat<Scalar>& dcols, const Shape& s, int batch, int k, int stride, const Shape& o, Mat<Scalar>& din) {
  const int hw = s.spatial();
  const int ohw = o.spatial();
  din.setZero(s.channels, static_cast<Eigen::Index>(batch) * hw);
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < s.channels; ++c)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          const Eigen::Index row = (static_cast<Eigen::Index>(c) * k + ky) * k + kx;
          for (int oy = 0; oy < o.height; ++oy) {
            const Eigen::Index col0 = static_cast<Eigen::Index>(b) * ohw + static_cast<Eigen::Index>(oy) * o.width;
            const Eigen::Index in0 = static_cast<Eigen::Index>(b) * hw + static_cast<Eigen::Index>(oy * stride + ky) * s.width + kx;
            for (int ox = 0; ox < o.width; ++ox) din(c, in0 + ox * stride) += dcols(row, col0 + ox);
          }
        }
}

}  // namespace detail

/// Forward pass over a batch. `input` is 1 x (batch * H * W) for image
/// input. Returns 2 x batch logits. Throws NumericError on non-finite
/// activations.
template <typename Scalar>
Mat<Scalar> forward_batch(const NetworkParams<Scalar>& params, const Mat<Scalar>& input, int batch,
                          ForwardCache<Scalar>* cache = nullptr) {
  using Kind = LayerSpec::Kind;
  const auto shapes = params.spec.shapes();
  if (input.rows() != shapes[0].channels || input.cols() != static_cast<Eigen::Index>(batch) * shapes[0].spatial())
    throw std::invalid_argument("forward_batch: input shape mismatch");

  ForwardCache<Scalar> local;
  ForwardCache<Scalar>& c = cache ? *cache : local;
  c.batch = batch;
  c.shapes = shapes;
  const std::size_t n = params.spec.layers.size();
  c.acts.resize(n + 1);
  c.cols.resize(n);
  c.argmax.resize(n);
  c.acts[0] = input;

  for (std::size_t i = 0; i < n; ++i) {
    const LayerSpec& l = params.spec.layers[i];
    const Shape& s = shapes[i];
    const Shape& o = shapes[i + 1];
    const Mat<Scalar>& in = c.acts[i];
    Mat<Scalar>& out = c.acts[i + 1];
    switch (l.kind) {
      case Kind::Conv: {
        detail::im2col(in, s, batch, l.kernel, l.stride, o, c.cols[i]);
        out.noalias() = params.weights[i] * c.cols[i];
        out.colwise() += params.biases[i];
        if (!cache) c.cols[i].resize(0, 0);
        break;
      }
      case Kind::ReLU:
        out = in.cwiseMax(Scalar(0));
        break;
      case Kind::MaxPool: {
        out.resize(o.channels, static_cast<Eigen::Index>(batch) * o.spatial());
        auto& winners = c.argmax[i];
        winners.resize(static_cast<std::size_t>(out.size()));
        for (int b = 0; b < batch; ++b)
          for (int oy = 0; oy < o.height; ++oy)
            for (int ox = 0; ox < o.width; ++ox) {
              const Eigen::Index ocol = static_cast<Eigen::Index>(b) * o.spatial() + oy * o.width + ox;
              for (int ch = 0; ch < s.channels; ++ch) {
                Eigen::Index best = -1;
                Scalar best_v = Scalar(0);
                for (int ky = 0; ky < l.kernel; ++ky)
                  for (int kx = 0; kx < l.kernel; ++kx) {
                    const Eigen::Index icol = static_cast<Eigen::Index>(b) * s.spatial() +
                                              (oy * l.stride + ky) * s.width + ox * l.stride + kx;
                    const Scalar v = in(ch, icol);
                    if (best < 0 || v > best_v) {
                      best = icol * in.rows() + ch;
                      best_v = v;
                    }
                  }
                out(ch, ocol) = best_v;
                winners[static_cast<std::size_t>(ocol * out.rows() + ch)] = best;
              }
            }
        break;
      }
      case Kind::Flatten: {
        if (s.flat()) {
          out = in;
          break;
        }
        out.resize(s.size(), batch);
        const int hw = s.spatial();
        for (int b = 0; b < batch; ++b)
          for (int ch = 0; ch < s.channels; ++ch)
            out.col(b).segment(static_cast<Eigen::Index>(ch) * hw, hw) =
                in.row(ch).segment(static_cast<Eigen::Index>(b) * hw, hw).transpose();
        break;
      }
      case Kind::Dense:
        out.noalias() = params.weights[i] * in;
        out.colwise() += params.biases[i];
        break;
    }
    if (!out.allFinite()) throw NumericError("numeric overflow: non-finite activation in layer " + std::to_string(i));
  }
  Mat<Scalar> logits = c.acts[n];
  if (!cache) {
    c.acts.clear();
    c.argmax.clear();
  }
  return logits;
}

/// Backpropagates d(loss)/d(logits) through a cached forward pass and
/// accumulates parameter gradients into `grads` (which must be shaped like
/// `params`).
template <typename Scalar>
void backward(const NetworkParams<Scalar>& params, const ForwardCache<Scalar>& c, const Mat<Scalar>& dlogits,
              NetworkParams<Scalar>& grads) {
  using Kind = LayerSpec::Kind;
  const std::size_t n = params.spec.layers.size();
  Mat<Scalar> d = dlogits;
  Mat<Scalar> dnext;
  for (std::size_t ii = n; ii-- > 0;) {
    const LayerSpec& l = params.spec.layers[ii];
    const Shape& s = c.shapes[ii];
    const Shape& o = c.shapes[ii + 1];
    const Mat<Scalar>& in = c.acts[ii];
    const bool need_input_grad = ii > 0;
    switch (l.kind) {
      case Kind::Conv: {
        grads.weights[ii].noalias() += d * c.cols[ii].transpose();
        grads.biases[ii] += d.rowwise().sum();
        if (need_input_grad) {
          const Mat<Scalar> dcols = params.weights[ii].transpose() * d;
          detail::col2im(dcols, s, c.batch, l.kernel, l.stride, o, dnext);
        }
        break;
      }
      case Kind::ReLU:
        dnext = (in.array() > Scalar(0)).select(d, Scalar(0));
        break;
      case Kind::MaxPool: {
        dnext.setZero(in.rows(), in.cols());
        const auto& winners = c.argmax[ii];
        for (Eigen::Index k = 0; k < d.size(); ++k) dnext.data()[winners[static_cast<std::size_t>(k)]] += d.data()[k];
        break;
      }
      case Kind::Flatten: {
        if (s.flat()) {
          dnext = d;
          break;
        }
        dnext.resize(s.channels, static_cast<Eigen::Index>(c.batch) * s.spatial());
        const int hw = s.spatial();
        for (int b = 0; b < c.batch; ++b)
          for (int ch = 0; ch < s.channels; ++ch)
            dnext.row(ch).segment(static_cast<Eigen::Index>(b) * hw, hw) =
                d.col(b).segment(static_cast<Eigen::Index>(ch) * hw, hw).transpose();
        break;
      }
      case Kind::Dense:
        grads.weights[ii].noalias() += d * in.transpose();
        grads.biases[ii] += d.rowwise().sum();
        if (need_input_grad) dnext.noalias() = params.weights[ii].transpose() * d;
        break;
    }
    if (!need_input_grad) break;
    d.swap(dnext);
  }
}

/// Packs frames into a network input batch, area-resampling each crop to
/// the spec input and centering intensities by kInputOffset.
template <typename Scalar>
Mat<Scalar> make_input(std::span<const world::Frame* const> frames, std::span<const CropRect> crops,
                       const NetSpec& spec) {
  const int h = spec.input_height, w = spec.input_width;
  Mat<Scalar> input(1, static_cast<Eigen::Index>(frames.size()) * h * w);
  for (std::size_t b = 0; b < frames.size(); ++b) {
    const world::Frame& f = *frames[b];
    const CropRect crop = crops.empty() ? CropRect::full(f) : crops[b];
    Scalar* dst = input.data() + static_cast<Eigen::Index>(b) * h * w;
    if (crop.x0 == 0 && crop.y0 == 0 && crop.width == w && crop.height == h && f.width == w && f.height == h) {
      for (int k = 0; k < h * w; ++k) dst[k] = static_cast<Scalar>(f.pixels[k] / 255.0 - kInputOffset);
    } else {
      const auto img = resample_area(f, crop, h, w);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) dst[y * w + x] = static_cast<Scalar>(img(y, x) - kInputOffset);
    }
  }
  return input;
}

/// Column-wise softmax probability of class 0 (Positive / go straight),
/// computed stably.
template <typename Scalar>
double positive_probability(Scalar logit_pos, Scalar logit_neg) {
  const double a = static_cast<double>(logit_pos), b = static_cast<double>(logit_neg);
  // sigmoid(a - b), written to avoid overflow in either direction
  const double z = a - b;
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Prediction {
  double p_straight = 0.5;
  Eigen::Vector2d logits = Eigen::Vector2d::Zero();
};

/// Single-frame inference: p_straight = softmax(logits)[Positive].
template <typename Scalar>
Prediction forward(const NetworkParams<Scalar>& params, const world::Frame& frame,
                   const CropRect* crop = nullptr) {
  const world::Frame* frames[1] = {&frame};
  const CropRect crops[1] = {crop ? *crop : CropRect::full(frame)};
  const Mat<Scalar> logits = forward_batch(params, make_input<Scalar>(frames, crops, params.spec), 1);
  Prediction p;
  p.logits = logits.col(0).template cast<double>();
  p.p_straight = positive_probability(logits(0, 0), logits(1, 0));
  return p;
}

/// Batched inference over frame/crop pairs.
template <typename Scalar>
std::vector<Prediction> forward_many(const NetworkParams<Scalar>& params, std::span<const world::Frame* const> frames,
                                     std::span<const CropRect> crops) {
  const auto batch = static_cast<int>(frames.size());
  const Mat<Scalar> logits = forward_batch(params, make_input<Scalar>(frames, crops, params.spec), batch);
  std::vector<Prediction> out(frames.size());
  for (int b = 0; b < batch; ++b) {
    out[b].logits = logits.col(b).template cast<double>();
    out[b].p_straight = positive_probability(logits(0, b), logits(1, b));
  }
  return out;
}

}  // namespace crashnav::learn
