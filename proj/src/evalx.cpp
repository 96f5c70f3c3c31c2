#include "kpinn/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "kpinn/common.hpp"

namespace kpinn {

ErrorReport error_from_values(std::span<const double> u_model, const RefSolution& ref) {
  const int m = ref.grid.m;
  const int n_t = ref.grid.n_t;
  const std::size_t total = static_cast<std::size_t>(m) * n_t;
  if (u_model.size() != total) {
    throw std::invalid_argument("error_from_values: model table size mismatch");
  }

  ErrorReport rep;
  rep.rms_per_level.resize(n_t);
  rep.n_eval = total;
  double sum_sq = 0.0;
  for (int k = 0; k < n_t; ++k) {
    double level_sq = 0.0;
    const std::size_t base = static_cast<std::size_t>(k) * m;
    for (int j = 0; j < m; ++j) {
      const double e = u_model[base + j] - ref.values[base + j];
      level_sq += e * e;
      rep.max_abs_error = std::max(rep.max_abs_error, std::abs(e));
    }
    rep.rms_per_level[k] = std::sqrt(level_sq / m);
    sum_sq += level_sq;
  }
  rep.energy_norm = std::sqrt(sum_sq / static_cast<double>(total));
  return rep;
}

ErrorReport energy_norm(const ParamSet& params, const NetConfig& cfg, const RefSolution& ref) {
  const int m = ref.grid.m;
  const int n_t = ref.grid.n_t;
  std::vector<std::pair<double, double>> pts(static_cast<std::size_t>(m) * n_t);
  for (int k = 0; k < n_t; ++k) {
    const double tk = ref.t_level(k);
    for (int j = 0; j < m; ++j) {
      pts[static_cast<std::size_t>(k) * m + j] = {ref.grid.center(j), tk};
    }
  }
  const std::vector<double> u = forward_batch(params, cfg, pts);
  return error_from_values(u, ref);
}

ErrorReport energy_norm(const ParamSet& params, const NetConfig& cfg, const RefSolution& ref,
                        const ProblemSpec& expected) {
  const ProblemSpec& got = ref.problem;
  if (got.K != expected.K || got.T != expected.T || got.ic != expected.ic ||
      (got.ic == InitialCondition::kDirac && got.eps != expected.eps)) {
    throw std::invalid_argument("energy_norm: reference was built for a different problem");
  }
  return energy_norm(params, cfg, ref);
}

ProfileTable profile(const ParamSet& params, const NetConfig& cfg,
                     std::span<const double> t_values, int m_plot) {
  if (m_plot < 2) throw std::invalid_argument("profile: m_plot must be >= 2");
  if (t_values.empty()) throw std::invalid_argument("profile: no time values");

  ProfileTable table;
  table.times.assign(t_values.begin(), t_values.end());
  table.thetas.resize(m_plot);
  const double d = kTwoPi / m_plot;
  for (int r = 0; r < m_plot; ++r) table.thetas[r] = (r + 0.5) * d;

  const std::size_t nc = table.times.size();
  std::vector<std::pair<double, double>> pts(static_cast<std::size_t>(m_plot) * nc);
  for (int r = 0; r < m_plot; ++r) {
    for (std::size_t c = 0; c < nc; ++c) pts[r * nc + c] = {table.thetas[r], table.times[c]};
  }
  table.values = forward_batch(params, cfg, pts);
  return table;
}

void write_profile_csv(const std::string& path, const ProfileTable& table) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "theta");
  for (double tv : table.times) std::fprintf(f, ",u_t%.6g", tv);
  std::fprintf(f, "\n");
  const std::size_t nc = table.times.size();
  for (std::size_t r = 0; r < table.thetas.size(); ++r) {
    std::fprintf(f, "%.17g", table.thetas[r]);
    for (std::size_t c = 0; c < nc; ++c) std::fprintf(f, ",%.17g", table.values[r * nc + c]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

void write_error_report_csv(const std::string& path, const ErrorReport& report,
                            const RefSolution& ref) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "# energy_norm=%.17g max_abs_error=%.17g n_eval=%zu\n", report.energy_norm,
               report.max_abs_error, report.n_eval);
  std::fprintf(f, "t,rms\n");
  for (std::size_t k = 0; k < report.rms_per_level.size(); ++k) {
    std::fprintf(f, "%.17g,%.17g\n", ref.t_level(static_cast<int>(k)), report.rms_per_level[k]);
  }
  std::fclose(f);
}

double total_variation(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("total_variation: need >= 2 samples");
  double tv = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) tv += std::abs(samples[i] - samples[i - 1]);
  return tv;
}

}  // namespace kpinn
