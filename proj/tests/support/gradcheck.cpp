#include "crashnav/learn/train.hpp"
#include "oracles.hpp"

#include <cmath>

namespace crashnav::oracle {
namespace {

// ReLU signs and max-pool winners of one forward pass.
std::vector<std::vector<Eigen::Index>> activation_pattern(const learn::NetworkParams<double>& params,
                                                          const learn::Mat<double>& input, int batch) {
  using Kind = learn::LayerSpec::Kind;
  learn::ForwardCache<double> cache;
  learn::forward_batch(params, input, batch, &cache);
  std::vector<std::vector<Eigen::Index>> out;
  for (std::size_t i = 0; i < params.spec.layers.size(); ++i) {
    if (params.spec.layers[i].kind == Kind::ReLU) {
      const auto& pre = cache.acts[i];
      std::vector<Eigen::Index> signs(static_cast<std::size_t>(pre.size()));
      for (Eigen::Index k = 0; k < pre.size(); ++k) signs[static_cast<std::size_t>(k)] = pre.data()[k] > 0;
      out.push_back(std::move(signs));
    } else if (params.spec.layers[i].kind == Kind::MaxPool) {
      out.push_back(cache.argmax[i]);
    }
  }
  return out;
}

}  // namespace

learn::NetSpec toy_spec() {
  using L = learn::LayerSpec;
  learn::NetSpec s;
  s.input_height = s.input_width = 16;
  s.layers = {L::conv(2, 3, 1), L::relu(), L::max_pool(2, 2), L::conv(4, 3, 2), L::relu(),
              L::flatten(),     L::dense(8), L::relu(),       L::dense(2)};
  return s;
}

GradientCheck gradient_check(int draws, std::uint64_t seed, double step, double tolerance, double floor,
                             int batch) {
  const int kBatch = batch;
  constexpr double kL2 = 1e-4;
  const learn::NetSpec spec = toy_spec();
  GradientCheck out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pixel(-0.5, 0.5);
  for (int d = 0; d < draws; ++d) {
    auto params = learn::NetworkParams<double>::he_init(spec, rng());
    // Non-zero biases so bias gradients are exercised away from zero.
    for (auto& b : params.biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.1 * pixel(rng);
    learn::Mat<double> input(1, kBatch * 16 * 16);
    for (Eigen::Index i = 0; i < input.size(); ++i) input(i) = pixel(rng);
    std::vector<int> labels(kBatch);
    for (int& l : labels) l = static_cast<int>(rng() & 1);

    auto analytic = learn::loss_and_gradients(params, input, labels, kL2).gradients;
    const auto base = activation_pattern(params, input, kBatch);
    const std::size_t n = params.parameter_count();
    for (std::size_t i = 0; i < n; ++i) {
      double& p = params.flat(i);
      const double saved = p;
      p = saved + step;
      const double up = learn::loss_and_gradients(params, input, labels, kL2).loss;
      bool kink = activation_pattern(params, input, kBatch) != base;
      p = saved - step;
      const double down = learn::loss_and_gradients(params, input, labels, kL2).loss;
      kink = kink || activation_pattern(params, input, kBatch) != base;
      p = saved;
      const double numeric = (up - down) / (2 * step);
      const double a = analytic.flat(i);
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double rel = scale < floor ? 0.0 : std::abs(a - numeric) / scale;
      ++out.checked;
      if (rel <= tolerance) ++out.agreeing;
      out.worst_relative = std::max(out.worst_relative, rel);
      if (kink) {
        ++out.kink_crossings;
      } else {
        ++out.smooth_checked;
        if (rel <= tolerance) ++out.smooth_agreeing;
        out.worst_smooth_relative = std::max(out.worst_smooth_relative, rel);
      }
    }
  }
  return out;
}

}  // namespace crashnav::oracle
