#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace crashnav::learn {

struct LayerSpec {
  enum class Kind : std::uint8_t { Conv = 0, ReLU = 1, MaxPool = 2, Flatten = 3, Dense = 4 };
  Kind kind = Kind::ReLU;
  int out = 0;     // Conv: out channels, Dense: out features
  int kernel = 0;  // Conv / MaxPool
  int stride = 1;  // Conv / MaxPool

  static LayerSpec conv(int out_channels, int kernel, int stride) { return {Kind::Conv, out_channels, kernel, stride}; }
  static LayerSpec relu() { return {Kind::ReLU, 0, 0, 1}; }
  static LayerSpec max_pool(int kernel, int stride) { return {Kind::MaxPool, 0, kernel, stride}; }
  static LayerSpec flatten() { return {Kind::Flatten, 0, 0, 1}; }
  static LayerSpec dense(int out_features) { return {Kind::Dense, out_features, 0, 1}; }

  bool has_params() const { return kind == Kind::Conv || kind == Kind::Dense; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Activation shape. Flattened / dense activations use height = width = 1.
struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  int spatial() const { return height * width; }
  int size() const { return channels * height * width; }
  bool flat() const { return height == 1 && width == 1; }

  friend bool operator==(const Shape&, const Shape&) = default;
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetSpec {
  int input_height = 64;
  int input_width = 64;
  std::vector<LayerSpec> layers;

  /// 64x64 -> Conv(8,5,2) ReLU MaxPool(2,2) Conv(16,3,2) ReLU Conv(32,3,2)
  /// ReLU Flatten Dense(64) ReLU Dense(2).
  static NetSpec default_spec();

  /// Input shape followed by the output shape of every layer. Throws
  /// SpecError when the chain does not fit or the net does not end in two
  /// logits.
  std::vector<Shape> shapes() const;
  void validate() const { (void)shapes(); }
  std::string describe() const;

  friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

}  // namespace crashnav::learn
