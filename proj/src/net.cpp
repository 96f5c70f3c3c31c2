#include "kpinn/net.hpp"

#include <cmath>

#include "kpinn/kernels.hpp"
#include "kpinn/rng.hpp"

namespace kpinn {

const char* init_scheme_name(Activation act) {
  return act == Activation::kRelu ? "he-normal" : "glorot-uniform";
}

ParamSet init_params(const NetConfig& cfg) {
  cfg.validate();
  const ParamLayout lay = layout_for(cfg);
  ParamSet ps{lay, std::vector<double>(lay.size(), 0.0)};
  SplitMix64 rng(cfg.seed);
  for (int layer = 0; layer < lay.layer_count(); ++layer) {
    const int in = lay.in_dim(layer);
    const int out = lay.out_dim(layer);
    double* w = ps.values.data() + lay.weight_offset(layer);
    const std::size_t count = static_cast<std::size_t>(out) * in;
    if (cfg.activation == Activation::kRelu) {
      const double std = std::sqrt(2.0 / in);
      for (std::size_t k = 0; k < count; ++k) w[k] = std * rng.normal();
    } else {
      const double bound = std::sqrt(6.0 / (in + out));
      for (std::size_t k = 0; k < count; ++k) w[k] = rng.uniform(-bound, bound);
    }
    // biases stay zero
  }
  return ps;
}

double forward(const ParamSet& params, const NetConfig& cfg, double theta, double t) {
  return forward_eval<double, double>(params.values, ParamLayout{cfg.depth, cfg.width},
                                      cfg.activation, theta, t);
}

std::vector<double> forward_batch(const ParamSet& params, const NetConfig& cfg,
                                  std::span<const std::pair<double, double>> points) {
  const int ns = static_cast<int>(points.size());
  std::vector<double> out(points.size());
  if (ns == 0) return out;
  const ParamLayout lay{cfg.depth, cfg.width};
  const int n = cfg.width;

  // h and hn ping-pong across layers, so both need the widest layer size
  const std::size_t stride = static_cast<std::size_t>(ns) * std::max(n, 2);
  std::vector<double> h(stride);
  for (int s = 0; s < ns; ++s) {
    h[static_cast<std::size_t>(s) * 2] = points[static_cast<std::size_t>(s)].first;
    h[static_cast<std::size_t>(s) * 2 + 1] = points[static_cast<std::size_t>(s)].second;
  }
  std::vector<double> z(static_cast<std::size_t>(ns) * n);
  std::vector<double> hn(stride);
  std::vector<double> wt(static_cast<std::size_t>(n) * std::max(n, 2));

  for (int layer = 0; layer < lay.layer_count(); ++layer) {
    const int in = lay.in_dim(layer);
    const int nout = lay.out_dim(layer);
    kern::transpose(nout, in, params.values.data() + lay.weight_offset(layer), wt.data());
    kern::affine_forward(ns, in, nout, h.data(), wt.data(),
                         params.values.data() + lay.bias_offset(layer), z.data());
    if (layer < lay.depth) {
      kern::act_forward(cfg.activation, ns * nout, z.data(), hn.data());
      std::swap(h, hn);
    } else {
      h.assign(z.begin(), z.begin() + ns);
    }
    for (int s = 0; s < ns * (layer < lay.depth ? nout : 1); ++s)
      if (!std::isfinite(h[static_cast<std::size_t>(s)]))
        throw NonFiniteError("non-finite activation in layer " + std::to_string(layer), layer);
  }
  out.assign(h.begin(), h.begin() + ns);
  return out;
}

}  // namespace kpinn
