#pragma once

#include "crashnav/label/label.hpp"
#include "crashnav/learn/network.hpp"

#include <functional>
#include <span>

namespace crashnav::learn {

/// Mean negative log-likelihood over a batch plus 0.5 * l2 * sum(w^2) over
/// weight matrices (biases are not decayed).
template <typename Scalar>
struct LossAndGradients {
  double loss = 0.0;
  double data_loss = 0.0;  // without the decay term
  NetworkParams<Scalar> gradients;
};

template <typename Scalar>
double l2_penalty(const NetworkParams<Scalar>& params, double l2) {
  double sum = 0.0;
  for (const auto& w : params.weights) sum += w.template cast<double>().squaredNorm();
  return 0.5 * l2 * sum;
}

/// Loss and reverse-mode gradients for an encoded batch (see make_input) with
/// class indices in `labels` (0 = Positive, 1 = Negative).
template <typename Scalar>
LossAndGradients<Scalar> loss_and_gradients(const NetworkParams<Scalar>& params, const Mat<Scalar>& input,
                                            std::span<const int> labels, double l2 = 0.0) {
  const auto batch = static_cast<int>(labels.size());
  if (batch == 0) throw std::invalid_argument("loss_and_gradients: empty batch");
  ForwardCache<Scalar> cache;
  const Mat<Scalar> logits = forward_batch(params, input, batch, &cache);

  Mat<Scalar> dlogits(logits.rows(), logits.cols());
  double nll = 0.0;
  for (int b = 0; b < batch; ++b) {
    const Scalar m = logits.col(b).maxCoeff();
    const auto shifted = (logits.col(b).array() - m).eval();
    const Scalar lse = std::log(shifted.exp().sum());
    const auto logp = (shifted - lse).eval();
    nll -= static_cast<double>(logp(labels[b]));
    dlogits.col(b) = logp.exp().matrix();
    dlogits(labels[b], b) -= Scalar(1);
  }
  dlogits /= static_cast<Scalar>(batch);

  LossAndGradients<Scalar> out;
  out.data_loss = nll / batch;
  out.loss = out.data_loss + l2_penalty(params, l2);
  if (!std::isfinite(out.loss)) throw NumericError("numeric overflow: non-finite loss");
  out.gradients = NetworkParams<Scalar>::zeros(params.spec);
  backward(params, cache, dlogits, out.gradients);
  if (l2 > 0.0)
    for (std::size_t i = 0; i < params.weights.size(); ++i)
      out.gradients.weights[i] += static_cast<Scalar>(l2) * params.weights[i];
  return out;
}

/// Convenience overload over labeled samples.
template <typename Scalar>
LossAndGradients<Scalar> loss_and_gradients(const NetworkParams<Scalar>& params,
                                            std::span<const label::LabeledSample* const> batch, double l2 = 0.0) {
  std::vector<const world::Frame*> frames;
  std::vector<int> labels;
  for (const auto* s : batch) {
    frames.push_back(&s->frame);
    labels.push_back(static_cast<int>(s->label));
  }
  return loss_and_gradients(params, make_input<Scalar>(frames, {}, params.spec), labels, l2);
}

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 64;
  int epochs = 30;
  double momentum = 0.9;
  double lr_decay = 1.0;  // learning rate multiplier applied after each epoch
  double l2_weight_decay = 1e-4;
  std::uint64_t seed = 1;
  int early_stop_patience = 5;
  /// Flip each training image left-right with probability 1/2. Labels are
  /// unchanged: nearness of an obstacle does not depend on its side.
  bool mirror = true;

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;  // mean minibatch loss during each epoch
  std::vector<double> val_loss;
  std::vector<double> val_accuracy;
  int best_epoch = -1;
  bool stopped_early = false;
  bool diverged = false;
  std::string divergence_message;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;

  int epochs_run() const { return static_cast<int>(train_loss.size()); }
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  double mean_p_positive = 0.0;  // mean p_straight over Positive samples
  double mean_p_negative = 0.0;  // mean p_straight over Negative samples
  std::size_t samples = 0;
};

/// Loss / accuracy of `params` over the samples of one split.
Evaluation evaluate(const NetworkParams<float>& params, const label::Dataset& ds, label::Split split);

using EpochCallback = std::function<void(int epoch, const TrainReport&)>;

/// Minibatch SGD with momentum on the Train split, shuffled each epoch by a
/// seed-derived permutation. Tracks Val after every epoch and returns the
/// parameters of the best Val accuracy (earliest on ties). Stops after
/// early_stop_patience epochs without improvement. A non-finite loss stops
/// training with report.diverged set and the best parameters so far.
/// Requires both classes in Train (throws label::LabelError otherwise).
std::pair<NetworkParams<float>, TrainReport> train(const label::Dataset& ds, const NetSpec& spec,
                                                   const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace crashnav::learn
