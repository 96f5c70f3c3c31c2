#pragma once

#include <span>
#include <string>
#include <vector>

#include "kpinn/common.hpp"
#include "kpinn/model.hpp"

namespace kpinn {

// periodic cell grid on [0,2pi) with uniformly spaced storage levels on [0,T]
struct FvGrid {
  int m = 512;     // spatial cells
  int n_t = 205;   // stored time levels, including t=0 and t=T

  void validate() const;
  double dtheta() const { return kTwoPi / m; }
  double center(int j) const { return (j + 0.5) * dtheta(); }
};

struct RefSolution {
  FvGrid grid;
  ProblemSpec problem;
  double cfl = 0.9;
  std::vector<double> values;  // level-major: values[k*m + j]
  bool negative_overshoot = false;  // any cell dipped below -1e-10
  double min_value = 0.0;

  double t_level(int k) const { return problem.T * k / (grid.n_t - 1); }
  double value(int k, int j) const { return values[static_cast<std::size_t>(k) * grid.m + j]; }
  double mass(int k) const;
};

// discrete nonlocal velocity of cell averages, nodes at cell centers
// (circulant sine kernel, same Riemann sum as the quadrature velocity)
std::vector<double> fv_velocity(const ProblemSpec& spec, const FvGrid& grid,
                                std::span<const double> u);

// one forward-Euler step with the global Lax-Friedrichs flux
//   F_{j+1/2} = (V_j u_j + V_{j+1} u_{j+1})/2 - (alpha/2)(u_{j+1} - u_j)
// dt = min(cfl*dtheta/max(alpha,1e-12), dt_max); returns the dt taken
double fv_step(const ProblemSpec& spec, const FvGrid& grid, std::vector<double>& u,
               double cfl, double dt_max);

// march from the exact cell-average projection of u0 to t=T, linearly
// interpolating the substep states onto the stored levels
RefSolution fv_solve(const ProblemSpec& spec, const FvGrid& grid, double cfl);

struct ConvergenceRow {
  int m_coarse = 0;
  int m_fine = 0;
  double l1_error = 0.0;
  double observed_order = 0.0;  // NaN on the first row
};

// L1 self-convergence at t=T between successive refinements
std::vector<ConvergenceRow> fv_convergence_study(const ProblemSpec& spec,
                                                 std::span<const int> m_list, double cfl);
double fitted_order(std::span<const ConvergenceRow> rows);

// persistence; the loaders validate header/payload consistency
void save_ref_binary(const std::string& path, const RefSolution& ref);
RefSolution load_ref_binary(const std::string& path);
void save_ref_csv(const std::string& path, const RefSolution& ref);

}  // namespace kpinn
