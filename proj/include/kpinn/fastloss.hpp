#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kpinn/model.hpp"
#include "kpinn/net.hpp"
#include "kpinn/sample.hpp"

namespace kpinn {

// Batched full-epoch loss + gradient over fixed point sets. Numerically
// equivalent to the taped reference path (validated in tests) but organized
// as dense sample-major kernel calls:
//   - collocation points carry three streams (value + two input tangents),
//   - quadrature samples u(phi_j, t_i) and IC samples carry value streams,
//   - gradients flow through the quadrature term, seeded analytically.
// Results are independent of thread count (see kernels.hpp) and of the
// storage strategy: when the per-layer state stack for the N_r*N_q
// quadrature samples exceeds the memory budget, the epoch switches to
// panel mode, which recomputes forward states panel-by-panel during the
// backward sweep in the same accumulation order.
class FastLoss {
 public:
  struct Losses {
    double l_res = 0.0;
    double l_ic = 0.0;
    double l_total = 0.0;
  };

  FastLoss(const NetConfig& cfg, const ProblemSpec& spec, const QuadratureRule& quad,
           const CollocationSet& colloc, const ICSet& ic, double lam_res, double lam_ic,
           std::size_t memory_budget = std::size_t(2) << 30);

  // losses at `params` and the full-batch gradient (canonical layout);
  // grad is overwritten, not accumulated into
  Losses loss_and_grad(std::span<const double> params, std::span<double> grad);

  // losses only (no backward sweep)
  Losses loss_only(std::span<const double> params);

  bool panel_mode() const { return panel_mode_; }

 private:
  struct Streams;  // per-layer state stacks

  void load_params(std::span<const double> params);
  void forward_quad(int s0, int s1, std::vector<std::vector<double>>& h_stack,
                    std::vector<std::vector<double>>& z_stack, int base);
  void backward_quad(int s0, int s1, const std::vector<std::vector<double>>& h_stack,
                     const std::vector<std::vector<double>>& z_stack, int base,
                     std::span<double> grad);
  void forward_colloc();
  void forward_ic();
  Losses compute_losses();

  NetConfig cfg_;
  ProblemSpec spec_;
  QuadratureRule quad_;
  ParamLayout lay_;
  double lam_res_, lam_ic_;
  int nr_, n0_, nq_;
  std::size_t nm_;
  bool needs_z_;      // sin reconstructs sigma' from pre-activations
  bool panel_mode_;
  int panel_;

  // fixed problem data
  std::vector<double> xc_, xq_, xic_;   // inputs [ns x 2]
  std::vector<double> smat_, cmat_;     // sin/cos(theta_i - phi_j) [nr x nq]
  std::vector<double> u0_;              // IC targets

  // parameter views for the current epoch
  std::span<const double> params_;
  std::vector<std::vector<double>> wt_;  // transposed weights per layer

  // per-epoch state
  std::vector<double> uq_;                       // quad sample values [nm]
  std::vector<double> vel_, dvel_;               // V_i, dV/dtheta_i [nr]
  std::vector<double> uc_, ucth_, uct_;          // colloc outputs [nr]
  std::vector<double> uic_;                      // IC outputs [n0]
  std::vector<double> rho_;                      // residual seeds [nr]
  std::vector<std::vector<double>> qh_, qz_;     // quad stacks (stack mode)
  std::vector<std::vector<double>> ph_, pz_;     // quad panel buffers
  std::vector<std::vector<double>> ch_, chth_, cht_;  // colloc h-streams
  std::vector<std::vector<double>> cz_, czth_, czt_;  // colloc z-streams (sin)
  std::vector<std::vector<double>> ih_, iz_;     // IC stacks
  std::vector<double> za_, zb_, zc_, zd_, ze_, zf_;  // layer work buffers
};

}  // namespace kpinn
