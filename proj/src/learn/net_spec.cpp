#include "crashnav/learn/net_spec.hpp"

#include <sstream>

namespace crashnav::learn {

NetSpec NetSpec::default_spec() {
  NetSpec s;
  s.input_height = 64;
  s.input_width = 64;
  s.layers = {LayerSpec::conv(8, 5, 2),  LayerSpec::relu(),      LayerSpec::max_pool(2, 2),
              LayerSpec::conv(16, 3, 2), LayerSpec::relu(),      LayerSpec::conv(32, 3, 2),
              LayerSpec::relu(),         LayerSpec::flatten(),   LayerSpec::dense(64),
              LayerSpec::relu(),         LayerSpec::dense(2)};
  return s;
}

std::vector<Shape> NetSpec::shapes() const {
  using Kind = LayerSpec::Kind;
  if (input_height < 1 || input_width < 1) throw SpecError("NetSpec: input must be at least 1x1");
  std::vector<Shape> out{{1, input_height, input_width}};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const Shape s = out.back();
    Shape o = s;
    const std::string where = "NetSpec layer " + std::to_string(i) + ": ";
    switch (l.kind) {
      case Kind::Conv:
      case Kind::MaxPool:
        if (l.kernel < 1 || l.stride < 1) throw SpecError(where + "kernel and stride must be >= 1");
        if (s.height < l.kernel || s.width < l.kernel) throw SpecError(where + "kernel larger than input");
        o.height = (s.height - l.kernel) / l.stride + 1;
        o.width = (s.width - l.kernel) / l.stride + 1;
        if (l.kind == Kind::Conv) {
          if (l.out < 1) throw SpecError(where + "conv needs out_channels >= 1");
          o.channels = l.out;
        }
        break;
      case Kind::ReLU:
        break;
      case Kind::Flatten:
        o = {s.size(), 1, 1};
        break;
      case Kind::Dense:
        if (!s.flat()) throw SpecError(where + "dense layer needs a flattened input");
        if (l.out < 1) throw SpecError(where + "dense needs out_features >= 1");
        o = {l.out, 1, 1};
        break;
      default:
        throw SpecError(where + "unknown layer kind");
    }
    out.push_back(o);
  }
  if (layers.empty() || layers.back().kind != Kind::Dense || out.back().channels != 2)
    throw SpecError("NetSpec: final layer must be Dense(2) (binary softmax)");
  return out;
}

std::string NetSpec::describe() const {
  using Kind = LayerSpec::Kind;
  std::ostringstream os;
  os << input_height << "x" << input_width;
  for (const auto& l : layers) {
    os << " -> ";
    switch (l.kind) {
      case Kind::Conv: os << "Conv(" << l.out << "," << l.kernel << "," << l.stride << ")"; break;
      case Kind::ReLU: os << "ReLU"; break;
      case Kind::MaxPool: os << "MaxPool(" << l.kernel << "," << l.stride << ")"; break;
      case Kind::Flatten: os << "Flatten"; break;
      case Kind::Dense: os << "Dense(" << l.out << ")"; break;
    }
  }
  return os.str();
}

}  // namespace crashnav::learn
