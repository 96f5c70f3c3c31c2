#include "kpinn/diff.hpp"

#include <cmath>

namespace kpinn {

ValueWithPartials eval_with_input_partials(const ParamSet& params, const NetConfig& cfg,
                                           double theta, double t) {
  const ParamLayout lay{cfg.depth, cfg.width};
  const Dual2<double> th(theta, 1.0, 0.0);
  const Dual2<double> tt(t, 0.0, 1.0);
  const Dual2<double> r =
      forward_eval<Dual2<double>, double>(params.values, lay, cfg.activation, th, tt);
  if (!std::isfinite(r.v) || !std::isfinite(r.dth) || !std::isfinite(r.dt))
    throw NonFiniteError("non-finite value or input partial");
  return {r.v, r.dth, r.dt};
}

TapeNet::TapeNet(const ParamSet& params, const NetConfig& cfg)
    : layout_{cfg.depth, cfg.width}, act_(cfg.activation) {
  leaves_.reserve(params.values.size());
  for (double v : params.values) leaves_.push_back(tape_.input(v));
}

Dual2<Var> TapeNet::eval(double theta, double t) const {
  const Dual2<Var> th(Var(theta), Var(1.0), Var(0.0));
  const Dual2<Var> tt(Var(t), Var(0.0), Var(1.0));
  return forward_eval<Dual2<Var>, Var>(leaves_, layout_, act_, th, tt);
}

Var TapeNet::eval_value(double theta, double t) const {
  return forward_eval<Var, Var>(leaves_, layout_, act_, Var(theta), Var(t));
}

GradientVector TapeNet::param_gradient(const Var& loss) const {
  std::vector<double> adj = tape_.gradient(loss);
  adj.resize(layout_.size());
  return adj;
}

std::pair<double, GradientVector> grad_loss(const ParamSet& params, const NetConfig& cfg,
                                            const std::function<Var(TapeNet&)>& loss_fn) {
  TapeNet net(params, cfg);
  const Var loss = loss_fn(net);
  if (!std::isfinite(loss.v)) throw NonFiniteError("non-finite loss value");
  GradientVector grad = net.param_gradient(loss);
  for (std::size_t k = 0; k < grad.size(); ++k)
    if (!std::isfinite(grad[k]))
      throw NonFiniteError("non-finite gradient entry " + std::to_string(k),
                           static_cast<int>(k));
  return {loss.v, std::move(grad)};
}

}  // namespace kpinn
