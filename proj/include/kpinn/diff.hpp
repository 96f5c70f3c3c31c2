#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "kpinn/dual.hpp"
#include "kpinn/net.hpp"
#include "kpinn/tape.hpp"

namespace kpinn {

// u and its two input partials at one point
struct ValueWithPartials {
  double u = 0.0;
  double du_dtheta = 0.0;
  double du_dt = 0.0;
};

// gradient w.r.t. every trainable parameter, canonical ParamLayout ordering
using GradientVector = std::vector<double>;

// forward-mode pass with tangent channels seeded on theta and t
ValueWithPartials eval_with_input_partials(const ParamSet& params, const NetConfig& cfg,
                                           double theta, double t);

// Network whose parameters live as leaves on a reverse-mode tape. Evaluations
// return tape-tracked duals, so losses built from them — including losses of
// the input partials themselves — differentiate w.r.t. the parameters in one
// reverse sweep.
class TapeNet {
 public:
  TapeNet(const ParamSet& params, const NetConfig& cfg);
  TapeNet(const TapeNet&) = delete;  // leaves point into the owned tape
  TapeNet& operator=(const TapeNet&) = delete;

  // tracked u, du/dtheta, du/dt at one point
  Dual2<Var> eval(double theta, double t) const;

  // tracked u only (no tangent channels); cheaper for quadrature/IC terms
  Var eval_value(double theta, double t) const;

  std::span<const Var> params() const { return leaves_; }
  Tape& tape() { return tape_; }

  // adjoints of the parameter leaves; length = parameter count
  GradientVector param_gradient(const Var& loss) const;

 private:
  Tape tape_;
  std::vector<Var> leaves_;
  ParamLayout layout_;
  Activation act_;
};

// loss and exact parameter gradient of an arbitrary taped scalar loss
std::pair<double, GradientVector> grad_loss(const ParamSet& params, const NetConfig& cfg,
                                            const std::function<Var(TapeNet&)>& loss_fn);

}  // namespace kpinn
