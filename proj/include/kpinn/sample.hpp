#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kpinn {

// fixed residual sample set, Latin-hypercube over [0,2pi] x [0,T]
struct CollocationSet {
  std::vector<std::pair<double, double>> points;  // (theta_i, t_i)
  int n_r = 0;
  std::uint64_t seed = 0;
};

// initial-condition sample set over [0,2pi]
struct ICSet {
  std::vector<double> points;
  int n_0 = 0;
  std::uint64_t seed = 0;
};

// one point per stratum in each marginal; stratum pairing shuffled by seed
CollocationSet lhs_sample(int n_r, double t_final, std::uint64_t seed);

// stratified-uniform: theta_k = (k + U_k) * 2pi/N_0
ICSet ic_sample(int n_0, std::uint64_t seed);

void write_points_csv(const std::string& path, const CollocationSet& set);
void write_points_csv(const std::string& path, const ICSet& set);

}  // namespace kpinn
