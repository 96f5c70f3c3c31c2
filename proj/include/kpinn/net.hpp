#pragma once

#include <cstdint>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "kpinn/activation.hpp"
#include "kpinn/common.hpp"
#include "kpinn/dual.hpp"

namespace kpinn {

// architecture of the fully-connected net u(theta, t): 2 -> n x L -> 1
struct NetConfig {
  int depth = 4;    // hidden layers L
  int width = 64;   // neurons per hidden layer n
  Activation activation = Activation::kTanh;
  std::uint64_t seed = 0;

  void validate() const {
    if (depth < 1) throw std::invalid_argument("NetConfig: depth must be >= 1");
    if (width < 1) throw std::invalid_argument("NetConfig: width must be >= 1");
  }
};

// canonical flat layout of the trainable parameters: affine layers 0..L in
// order, weights (row-major, out x in) before biases. Gradients use the
// identical ordering.
struct ParamLayout {
  int depth = 0;
  int width = 0;

  int layer_count() const { return depth + 1; }
  int in_dim(int layer) const { return layer == 0 ? 2 : width; }
  int out_dim(int layer) const { return layer == depth ? 1 : width; }

  std::size_t weight_offset(int layer) const {
    std::size_t off = 0;
    for (int l = 0; l < layer; ++l)
      off += static_cast<std::size_t>(out_dim(l)) * in_dim(l) + out_dim(l);
    return off;
  }
  std::size_t bias_offset(int layer) const {
    return weight_offset(layer) + static_cast<std::size_t>(out_dim(layer)) * in_dim(layer);
  }
  std::size_t size() const { return weight_offset(layer_count()); }
};

inline ParamLayout layout_for(const NetConfig& cfg) { return ParamLayout{cfg.depth, cfg.width}; }

// closed form of ParamLayout::size(): 2n + n + (L-1)(n^2 + n) + n + 1
inline std::size_t param_count(int depth, int width) {
  std::size_t n = static_cast<std::size_t>(width);
  return 2 * n + n + static_cast<std::size_t>(depth - 1) * (n * n + n) + n + 1;
}

struct ParamSet {
  ParamLayout layout;
  std::vector<double> values;

  std::span<const double> weight(int layer) const {
    return {values.data() + layout.weight_offset(layer),
            static_cast<std::size_t>(layout.out_dim(layer)) * layout.in_dim(layer)};
  }
  std::span<const double> bias(int layer) const {
    return {values.data() + layout.bias_offset(layer),
            static_cast<std::size_t>(layout.out_dim(layer))};
  }
};

// deterministic initialization: Glorot-uniform for smooth activations,
// He-normal for ReLU, zero biases; scheme id is recorded in run metadata
ParamSet init_params(const NetConfig& cfg);
const char* init_scheme_name(Activation act);

// single forward pass; the workhorse template shared by the plain, dual and
// taped evaluation paths. P is the parameter scalar, S the input scalar.
template <class S, class P>
S forward_eval(std::span<const P> params, const ParamLayout& lay, Activation act,
               const S& theta, const S& t) {
  std::vector<S> h;
  std::vector<S> next;
  h.reserve(lay.width);
  next.reserve(lay.width);
  h.push_back(theta);
  h.push_back(t);
  for (int layer = 0; layer < lay.layer_count(); ++layer) {
    const int in = lay.in_dim(layer);
    const int out = lay.out_dim(layer);
    const P* w = params.data() + lay.weight_offset(layer);
    const P* b = params.data() + lay.bias_offset(layer);
    next.clear();
    for (int a = 0; a < out; ++a) {
      S acc = S(b[a]);
      for (int c = 0; c < in; ++c) acc = acc + w[a * in + c] * h[c];
      if (layer < lay.depth) acc = activate(act, acc);
      next.push_back(acc);
    }
    std::swap(h, next);
    if constexpr (std::is_same_v<S, double>) {
      for (const double& v : h)
        if (!std::isfinite(v))
          throw NonFiniteError("non-finite activation in layer " + std::to_string(layer), layer);
    }
  }
  return h[0];
}

// u(theta, t) for one point
double forward(const ParamSet& params, const NetConfig& cfg, double theta, double t);

// elementwise batch version (vectorized internally; agrees with the scalar
// loop to tight tolerance)
std::vector<double> forward_batch(const ParamSet& params, const NetConfig& cfg,
                                  std::span<const std::pair<double, double>> points);

}  // namespace kpinn
