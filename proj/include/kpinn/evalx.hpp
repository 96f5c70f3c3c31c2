#pragma once

#include <span>
#include <string>
#include <vector>

#include "kpinn/fvref.hpp"
#include "kpinn/net.hpp"

namespace kpinn {

// discrete L2 ("energy") error of the network against the reference grid
struct ErrorReport {
  double energy_norm = 0.0;
  double max_abs_error = 0.0;
  std::vector<double> rms_per_level;
  std::size_t n_eval = 0;
};

// error metrics from tabulated model values (level-major, same layout as
// RefSolution::values); shared by tests and the network path
ErrorReport error_from_values(std::span<const double> u_model, const RefSolution& ref);

// evaluates u_Phi at every reference node (cell center, stored level);
// the reference is never interpolated
ErrorReport energy_norm(const ParamSet& params, const NetConfig& cfg, const RefSolution& ref);

// same, but first checks that the reference was built for the expected problem
ErrorReport energy_norm(const ParamSet& params, const NetConfig& cfg, const RefSolution& ref,
                        const ProblemSpec& expected);

// dense u_Phi table for plotting: rows are the m_plot cell centers, one
// column per requested time
struct ProfileTable {
  std::vector<double> thetas;
  std::vector<double> times;
  std::vector<double> values;  // row-major [m_plot x times]

  double value(int r, int c) const {
    return values[static_cast<std::size_t>(r) * times.size() + c];
  }
};

ProfileTable profile(const ParamSet& params, const NetConfig& cfg,
                     std::span<const double> t_values, int m_plot);

void write_profile_csv(const std::string& path, const ProfileTable& table);
void write_error_report_csv(const std::string& path, const ErrorReport& report,
                            const RefSolution& ref);

// sum of |u_{k+1} - u_k|
double total_variation(std::span<const double> samples);

}  // namespace kpinn
