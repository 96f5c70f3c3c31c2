#pragma once

#include <span>
#include <utility>
#include <vector>

#include "kpinn/common.hpp"
#include "kpinn/diff.hpp"
#include "kpinn/net.hpp"

namespace kpinn {

enum class InitialCondition { kPolynomial, kDirac, kPiecewise };

const char* ic_name(InitialCondition ic);           // poly | dirac | piecewise
InitialCondition parse_ic(const std::string& s);

// physical problem: du/dt + d/dtheta(V[u] u) = 0 on [0,2pi] x [0,T] with
// V[u](theta,t) = -K integral sin(theta-phi) u(phi,t) dphi
struct ProblemSpec {
  double K = 1.0;
  double T = 1.0;
  InitialCondition ic = InitialCondition::kPolynomial;
  double eps = kPi / 32.0;  // mollifier half-width, Dirac IC only

  void validate() const;
};

// fixed uniform convolution nodes phi_j = j*2pi/N_q
struct QuadratureRule {
  int n_q = 0;
  double dphi = 0.0;
  std::vector<double> nodes;

  static QuadratureRule uniform(int n_q);
};

// pointwise initial density u0(theta); theta must lie in [0, 2pi]
double initial_condition(const ProblemSpec& spec, double theta);

// exact mean of u0 over a cell [a,b] (closed-form antiderivatives; used by
// the finite-volume projection so spike mass is never lost)
double ic_cell_average(const ProblemSpec& spec, double a, double b);

// analytic total mass of u0 over [0,2pi]
double ic_mass(const ProblemSpec& spec);

// discrete velocity and its exact theta-derivative given tabulated density
// values at the quadrature nodes:
//   V      = -K dphi sum_j sin(theta - phi_j) u_j
//   dV/dth = -K dphi sum_j cos(theta - phi_j) u_j   (nodes do not move)
double velocity_from_values(const ProblemSpec& spec, const QuadratureRule& quad,
                            std::span<const double> u_nodes, double theta);
double dvelocity_dtheta_from_values(const ProblemSpec& spec, const QuadratureRule& quad,
                                    std::span<const double> u_nodes, double theta);

// V[u_Phi](theta, t): network evaluated at the quadrature nodes
double velocity(const ParamSet& params, const NetConfig& cfg, const ProblemSpec& spec,
                const QuadratureRule& quad, double theta, double t);

// strong-form residual r = du/dt + (dV/dtheta) u + V du/dtheta
double residual(const ParamSet& params, const NetConfig& cfg, const ProblemSpec& spec,
                const QuadratureRule& quad, double theta, double t);

// L_res = mean of r^2 over the collocation points
double loss_residual(const ParamSet& params, const NetConfig& cfg, const ProblemSpec& spec,
                     const QuadratureRule& quad,
                     std::span<const std::pair<double, double>> colloc);

// L_IC = mean of (u_Phi(theta,0) - u0(theta))^2 over the IC points
double loss_ic(const ParamSet& params, const NetConfig& cfg, const ProblemSpec& spec,
               std::span<const double> ic_points);

inline double loss_total(double lam_res, double lam_ic, double l_res, double l_ic) {
  return lam_res * l_res + lam_ic * l_ic;
}

// full training loss recorded on a tape; gradients flow through the
// quadrature evaluations of the network. This is the reference gradient
// path that the batched fast path is validated against.
Var taped_total_loss(TapeNet& net, const ProblemSpec& spec, const QuadratureRule& quad,
                     std::span<const std::pair<double, double>> colloc,
                     std::span<const double> ic_points, double lam_res, double lam_ic);

}  // namespace kpinn
