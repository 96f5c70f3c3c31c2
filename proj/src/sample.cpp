#include "kpinn/sample.hpp"

#include <fstream>
#include <numeric>
#include <stdexcept>

#include "kpinn/common.hpp"
#include "kpinn/rng.hpp"

namespace kpinn {

namespace {

std::vector<int> shuffled_identity(int n, SplitMix64& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  for (int k = n - 1; k >= 1; --k)
    std::swap(p[static_cast<std::size_t>(k)],
              p[rng.bounded(static_cast<std::uint64_t>(k) + 1)]);
  return p;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  return out;
}

}  // namespace

CollocationSet lhs_sample(int n_r, double t_final, std::uint64_t seed) {
  if (n_r < 1) throw std::invalid_argument("lhs_sample: n_r must be >= 1");
  if (!(t_final > 0.0)) throw std::invalid_argument("lhs_sample: T must be > 0");
  SplitMix64 rng(seed);
  const std::vector<int> perm_th = shuffled_identity(n_r, rng);
  const std::vector<int> perm_t = shuffled_identity(n_r, rng);
  CollocationSet set;
  set.n_r = n_r;
  set.seed = seed;
  set.points.reserve(static_cast<std::size_t>(n_r));
  const double dth = kTwoPi / n_r;
  const double dt = t_final / n_r;
  for (int i = 0; i < n_r; ++i) {
    const double theta = (perm_th[static_cast<std::size_t>(i)] + rng.uniform01()) * dth;
    const double t = (perm_t[static_cast<std::size_t>(i)] + rng.uniform01()) * dt;
    set.points.emplace_back(theta, t);
  }
  return set;
}

ICSet ic_sample(int n_0, std::uint64_t seed) {
  if (n_0 < 1) throw std::invalid_argument("ic_sample: n_0 must be >= 1");
  SplitMix64 rng(seed);
  ICSet set;
  set.n_0 = n_0;
  set.seed = seed;
  set.points.reserve(static_cast<std::size_t>(n_0));
  const double dth = kTwoPi / n_0;
  for (int k = 0; k < n_0; ++k) set.points.push_back((k + rng.uniform01()) * dth);
  return set;
}

void write_points_csv(const std::string& path, const CollocationSet& set) {
  std::ofstream out = open_out(path);
  out << "theta,t\n";
  for (const auto& [theta, t] : set.points) out << theta << ',' << t << '\n';
}

void write_points_csv(const std::string& path, const ICSet& set) {
  std::ofstream out = open_out(path);
  out << "theta\n";
  for (double theta : set.points) out << theta << '\n';
}

}  // namespace kpinn
