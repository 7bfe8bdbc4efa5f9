#include "crashnav/learn/train.hpp"

#include <algorithm>
#include <numeric>

namespace crashnav::learn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("TrainConfig: momentum must be in [0, 1)");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw std::invalid_argument("TrainConfig: lr_decay must be in (0, 1]");
  if (l2_weight_decay < 0.0) throw std::invalid_argument("TrainConfig: l2_weight_decay must be >= 0");
  if (early_stop_patience < 1) throw std::invalid_argument("TrainConfig: early_stop_patience must be >= 1");
}

namespace {

std::vector<std::size_t> indices_of(const label::Dataset& ds, label::Split split) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    if (ds.split[i] == split) idx.push_back(i);
  return idx;
}

Evaluation evaluate_indices(const NetworkParams<float>& params, const label::Dataset& ds,
                            const std::vector<std::size_t>& idx) {
  Evaluation ev;
  ev.samples = idx.size();
  if (idx.empty()) return ev;
  constexpr std::size_t kChunk = 256;
  std::size_t correct = 0, n_pos = 0, n_neg = 0;
  double loss = 0.0;
  std::vector<const world::Frame*> frames;
  for (std::size_t start = 0; start < idx.size(); start += kChunk) {
    const std::size_t end = std::min(idx.size(), start + kChunk);
    frames.clear();
    for (std::size_t k = start; k < end; ++k) frames.push_back(&ds.samples[idx[k]].frame);
    const auto batch = static_cast<int>(frames.size());
    const Mat<float> logits = forward_batch(params, make_input<float>(frames, {}, params.spec), batch);
    for (int b = 0; b < batch; ++b) {
      const auto& s = ds.samples[idx[start + b]];
      const double p = positive_probability(logits(0, b), logits(1, b));
      const bool positive = s.label == label::Label::Positive;
      const double p_true = positive ? p : 1.0 - p;
      loss -= std::log(std::max(p_true, 1e-300));
      if ((p > 0.5) == positive) ++correct;
      if (positive) {
        ev.mean_p_positive += p;
        ++n_pos;
      } else {
        ev.mean_p_negative += p;
        ++n_neg;
      }
    }
  }
  ev.loss = loss / idx.size();
  ev.accuracy = static_cast<double>(correct) / idx.size();
  if (n_pos) ev.mean_p_positive /= n_pos;
  if (n_neg) ev.mean_p_negative /= n_neg;
  return ev;
}

void mirror_some(Mat<float>& input, const NetSpec& spec, std::mt19937_64& rng) {
  const int h = spec.input_height, w = spec.input_width;
  const Eigen::Index n = input.size() / (static_cast<Eigen::Index>(h) * w);
  for (Eigen::Index b = 0; b < n; ++b) {
    if ((rng() >> 63) == 0) continue;
    float* img = input.data() + b * h * w;
    for (int y = 0; y < h; ++y) std::reverse(img + y * w, img + (y + 1) * w);
  }
}

}  // namespace

Evaluation evaluate(const NetworkParams<float>& params, const label::Dataset& ds, label::Split split) {
  return evaluate_indices(params, ds, indices_of(ds, split));
}

std::pair<NetworkParams<float>, TrainReport> train(const label::Dataset& ds, const NetSpec& spec,
                                                   const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  spec.validate();
  const auto train_idx = indices_of(ds, label::Split::Train);
  const auto val_idx = indices_of(ds, label::Split::Val);
  bool has_pos = false, has_neg = false;
  for (std::size_t i : train_idx) (ds.samples[i].label == label::Label::Positive ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw label::LabelError(label::LabelError::Kind::DegenerateDataset, "train split must contain both classes");
  const auto& monitor_idx = val_idx.empty() ? train_idx : val_idx;

  TrainReport report;
  report.train_samples = train_idx.size();
  report.val_samples = val_idx.size();

  auto params = NetworkParams<float>::he_init(spec, cfg.seed);
  auto velocity = NetworkParams<float>::zeros(spec);
  NetworkParams<float> best = params;
  double best_acc = -1.0;
  int since_best = 0;

  std::vector<std::size_t> order = train_idx;
  std::vector<const world::Frame*> frames;
  std::vector<int> labels;
  auto lr = static_cast<float>(cfg.learning_rate);
  const auto mu = static_cast<float>(cfg.momentum);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(epoch), std::uint64_t{0x7EA1}};
    std::mt19937_64 rng(seq);
    order = train_idx;
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    try {
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
        frames.clear();
        labels.clear();
        for (std::size_t k = start; k < end; ++k) {
          frames.push_back(&ds.samples[order[k]].frame);
          labels.push_back(static_cast<int>(ds.samples[order[k]].label));
        }
        Mat<float> input = make_input<float>(frames, {}, spec);
        if (cfg.mirror) mirror_some(input, spec, rng);
        auto lg = loss_and_gradients(params, input, labels, cfg.l2_weight_decay);
        for (std::size_t i = 0; i < params.weights.size(); ++i) {
          if (params.weights[i].size() == 0) continue;
          velocity.weights[i] = mu * velocity.weights[i] - lr * lg.gradients.weights[i];
          velocity.biases[i] = mu * velocity.biases[i] - lr * lg.gradients.biases[i];
          params.weights[i] += velocity.weights[i];
          params.biases[i] += velocity.biases[i];
        }
        loss_sum += lg.loss;
        ++batches;
      }
      if (!params.all_finite()) throw NumericError("numeric overflow: non-finite parameters");
    } catch (const NumericError& e) {
      report.diverged = true;
      report.divergence_message = e.what();
      break;
    }

    lr *= static_cast<float>(cfg.lr_decay);
    const Evaluation ev = evaluate_indices(params, ds, monitor_idx);
    report.train_loss.push_back(batches ? loss_sum / batches : 0.0);
    report.val_loss.push_back(ev.loss);
    report.val_accuracy.push_back(ev.accuracy);
    if (ev.accuracy > best_acc) {
      best_acc = ev.accuracy;
      best = params;
      report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      report.stopped_early = true;
      if (on_epoch) on_epoch(epoch, report);
      break;
    }
    if (on_epoch) on_epoch(epoch, report);
  }
  return {std::move(best), std::move(report)};
}

}  // namespace crashnav::learn
