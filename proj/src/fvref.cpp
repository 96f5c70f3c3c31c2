#include "kpinn/fvref.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string_view>

namespace kpinn {

namespace {

constexpr std::string_view kScheme = "lax-friedrichs-global-v1";

template <class T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

// circulant sine table: s[d] = sin(d*dtheta) for d = 0..2m-1, so that
// sin(theta_j - theta_mm) = s[j - mm + m] without wrapping arithmetic
struct KernelTable {
  std::vector<double> s;
  explicit KernelTable(const FvGrid& grid) : s(static_cast<std::size_t>(2 * grid.m)) {
    for (int d = 0; d < 2 * grid.m; ++d)
      s[static_cast<std::size_t>(d)] = std::sin(d * grid.dtheta());
  }
};

void velocity_into(const ProblemSpec& spec, const FvGrid& grid, std::span<const double> u,
                   const KernelTable& tab, std::vector<double>& v) {
  const int m = grid.m;
  v.resize(static_cast<std::size_t>(m));
  const double scale = -spec.K * grid.dtheta();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < m; ++j) {
    const double* srow = tab.s.data() + j + m;  // srow[-mm] = sin((j-mm)*dtheta)
    double acc = 0.0;
    for (int mm = 0; mm < m; ++mm) acc += srow[-mm] * u[static_cast<std::size_t>(mm)];
    v[static_cast<std::size_t>(j)] = scale * acc;
  }
}

double step_once(const ProblemSpec& spec, const FvGrid& grid, std::vector<double>& u,
                 const KernelTable& tab, double cfl, double dt_max, std::vector<double>& v,
                 std::vector<double>& flux) {
  const int m = grid.m;
  const double dth = grid.dtheta();
  velocity_into(spec, grid, u, tab, v);
  double alpha = 0.0;
  for (double vj : v) alpha = std::max(alpha, std::abs(vj));
  double dt = cfl * dth / std::max(alpha, 1e-12);
  dt = std::min(dt, dt_max);
  if (!(dt > 0.0)) return 0.0;
  if (alpha * dt > cfl * dth * (1.0 + 1e-12))
    throw std::runtime_error("fv_step: CFL violation");
  flux.resize(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static)
  for (int j = 0; j < m; ++j) {
    const int jn = j + 1 == m ? 0 : j + 1;
    flux[static_cast<std::size_t>(j)] =
        0.5 * (v[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)] +
               v[static_cast<std::size_t>(jn)] * u[static_cast<std::size_t>(jn)]) -
        0.5 * alpha * (u[static_cast<std::size_t>(jn)] - u[static_cast<std::size_t>(j)]);
  }
  const double lam = dt / dth;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < m; ++j) {
    const int jp = j == 0 ? m - 1 : j - 1;
    u[static_cast<std::size_t>(j)] -=
        lam * (flux[static_cast<std::size_t>(j)] - flux[static_cast<std::size_t>(jp)]);
  }
  for (double uj : u)
    if (!std::isfinite(uj)) throw std::runtime_error("fv_step: non-finite state");
  return dt;
}

}  // namespace

void FvGrid::validate() const {
  if (m < 8) throw std::invalid_argument("FvGrid: need at least 8 cells");
  if (n_t < 2) throw std::invalid_argument("FvGrid: need at least 2 stored levels");
}

double RefSolution::mass(int k) const {
  double acc = 0.0;
  for (int j = 0; j < grid.m; ++j) acc += value(k, j);
  return acc * grid.dtheta();
}

std::vector<double> fv_velocity(const ProblemSpec& spec, const FvGrid& grid,
                                std::span<const double> u) {
  KernelTable tab(grid);
  std::vector<double> v;
  velocity_into(spec, grid, u, tab, v);
  return v;
}

double fv_step(const ProblemSpec& spec, const FvGrid& grid, std::vector<double>& u,
               double cfl, double dt_max) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("fv_step: cfl must lie in (0,1]");
  KernelTable tab(grid);
  std::vector<double> v, flux;
  return step_once(spec, grid, u, tab, cfl, dt_max, v, flux);
}

RefSolution fv_solve(const ProblemSpec& spec, const FvGrid& grid, double cfl) {
  spec.validate();
  grid.validate();
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("fv_solve: cfl must lie in (0,1]");

  RefSolution sol;
  sol.grid = grid;
  sol.problem = spec;
  sol.cfl = cfl;
  sol.values.assign(static_cast<std::size_t>(grid.m) * grid.n_t, 0.0);

  std::vector<double> ucur(static_cast<std::size_t>(grid.m));
  for (int j = 0; j < grid.m; ++j)
    ucur[static_cast<std::size_t>(j)] =
        ic_cell_average(spec, j * grid.dtheta(), (j + 1) * grid.dtheta());

  std::copy(ucur.begin(), ucur.end(), sol.values.begin());
  sol.min_value = *std::min_element(ucur.begin(), ucur.end());

  KernelTable tab(grid);
  std::vector<double> v, flux;
  std::vector<double> uprev;
  double t = 0.0;
  int next_level = 1;
  const double tol = 1e-12 * spec.T;
  while (next_level < grid.n_t) {
    uprev = ucur;
    const double dt = step_once(spec, grid, ucur, tab, cfl, spec.T - t, v, flux);
    if (dt <= 0.0) {
      // t reached T within roundoff; copy the state into remaining levels
      for (; next_level < grid.n_t; ++next_level)
        std::copy(ucur.begin(), ucur.end(),
                  sol.values.begin() + static_cast<std::size_t>(next_level) * grid.m);
      break;
    }
    const double tn = t + dt;
    sol.min_value = std::min(sol.min_value, *std::min_element(ucur.begin(), ucur.end()));
    while (next_level < grid.n_t && sol.t_level(next_level) <= tn + tol) {
      const double lam = std::clamp((sol.t_level(next_level) - t) / dt, 0.0, 1.0);
      double* dst = sol.values.data() + static_cast<std::size_t>(next_level) * grid.m;
      for (int j = 0; j < grid.m; ++j)
        dst[j] = (1.0 - lam) * uprev[static_cast<std::size_t>(j)] +
                 lam * ucur[static_cast<std::size_t>(j)];
      ++next_level;
    }
    t = tn;
  }
  sol.negative_overshoot = sol.min_value < -1e-10;
  return sol;
}

std::vector<ConvergenceRow> fv_convergence_study(const ProblemSpec& spec,
                                                 std::span<const int> m_list, double cfl) {
  if (m_list.size() < 2)
    throw std::invalid_argument("fv_convergence_study: need at least two resolutions");
  for (std::size_t i = 1; i < m_list.size(); ++i) {
    if (m_list[i] < m_list[i - 1] || m_list[i] % m_list[i - 1] != 0)
      throw std::invalid_argument(
          "fv_convergence_study: resolutions must be non-decreasing multiples");
  }
  std::vector<std::vector<double>> finals;
  for (int m : m_list) {
    const RefSolution sol = fv_solve(spec, FvGrid{m, 2}, cfl);
    finals.emplace_back(sol.values.begin() + m, sol.values.end());
  }
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i + 1 < m_list.size(); ++i) {
    const int mc = m_list[i];
    const int mf = m_list[i + 1];
    const int f = mf / mc;
    double err = 0.0;
    for (int j = 0; j < mc; ++j) {
      double avg = 0.0;
      for (int k = 0; k < f; ++k) avg += finals[i + 1][static_cast<std::size_t>(j * f + k)];
      avg /= f;
      err += std::abs(avg - finals[i][static_cast<std::size_t>(j)]);
    }
    err *= kTwoPi / mc;
    ConvergenceRow row{mc, mf, err, std::numeric_limits<double>::quiet_NaN()};
    if (!rows.empty() && rows.back().l1_error > 0.0 && err > 0.0)
      row.observed_order = std::log(rows.back().l1_error / err) /
                           std::log(static_cast<double>(mc) / rows.back().m_coarse);
    rows.push_back(row);
  }
  return rows;
}

double fitted_order(std::span<const ConvergenceRow> rows) {
  // least-squares slope of log(error) against log(dtheta)
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const ConvergenceRow& r : rows) {
    if (!(r.l1_error > 0.0)) continue;
    const double x = std::log(kTwoPi / r.m_coarse);
    const double y = std::log(r.l1_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// binary layout: "KPRF" | u32 version | i32 m | i32 n_t | f64 T | f64 K |
// i32 ic | f64 eps | f64 cfl | u8 overshoot | f64 min_value |
// u32 scheme_len | scheme bytes | m*n_t doubles (level-major)
void save_ref_binary(const std::string& path, const RefSolution& ref) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write("KPRF", 4);
  write_pod(out, std::uint32_t{1});
  write_pod(out, std::int32_t{ref.grid.m});
  write_pod(out, std::int32_t{ref.grid.n_t});
  write_pod(out, ref.problem.T);
  write_pod(out, ref.problem.K);
  write_pod(out, static_cast<std::int32_t>(ref.problem.ic));
  write_pod(out, ref.problem.eps);
  write_pod(out, ref.cfl);
  write_pod(out, static_cast<std::uint8_t>(ref.negative_overshoot));
  write_pod(out, ref.min_value);
  write_pod(out, static_cast<std::uint32_t>(kScheme.size()));
  out.write(kScheme.data(), static_cast<std::streamsize>(kScheme.size()));
  write_pod(out, static_cast<std::uint64_t>(ref.values.size()));
  out.write(reinterpret_cast<const char*>(ref.values.data()),
            static_cast<std::streamsize>(ref.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

RefSolution load_ref_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open reference file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != "KPRF")
    throw std::runtime_error("corrupt reference file (bad magic): " + path);
  if (read_pod<std::uint32_t>(in) != 1)
    throw std::runtime_error("unsupported reference file version: " + path);
  RefSolution ref;
  ref.grid.m = read_pod<std::int32_t>(in);
  ref.grid.n_t = read_pod<std::int32_t>(in);
  ref.problem.T = read_pod<double>(in);
  ref.problem.K = read_pod<double>(in);
  const auto ic = read_pod<std::int32_t>(in);
  ref.problem.eps = read_pod<double>(in);
  ref.cfl = read_pod<double>(in);
  ref.negative_overshoot = read_pod<std::uint8_t>(in) != 0;
  ref.min_value = read_pod<double>(in);
  const auto slen = read_pod<std::uint32_t>(in);
  if (!in || ic < 0 || ic > 2 || slen > 256)
    throw std::runtime_error("corrupt reference header: " + path);
  ref.problem.ic = static_cast<InitialCondition>(ic);
  std::string scheme(slen, '\0');
  in.read(scheme.data(), slen);
  if (scheme != kScheme)
    throw std::runtime_error("unknown reference scheme '" + scheme + "': " + path);
  const auto count = read_pod<std::uint64_t>(in);
  ref.grid.validate();
  ref.problem.validate();
  if (count != static_cast<std::uint64_t>(ref.grid.m) * ref.grid.n_t)
    throw std::runtime_error("reference header/payload size mismatch: " + path);
  ref.values.resize(count);
  in.read(reinterpret_cast<char*>(ref.values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated reference file: " + path);
  for (double v : ref.values)
    if (!std::isfinite(v)) throw std::runtime_error("non-finite reference values: " + path);
  return ref;
}

void save_ref_csv(const std::string& path, const RefSolution& ref) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  out << "# scheme=" << kScheme << " m=" << ref.grid.m << " n_t=" << ref.grid.n_t
      << " T=" << ref.problem.T << " K=" << ref.problem.K
      << " ic=" << ic_name(ref.problem.ic) << " eps=" << ref.problem.eps
      << " cfl=" << ref.cfl << '\n';
  out << "t,theta,u\n";
  for (int k = 0; k < ref.grid.n_t; ++k)
    for (int j = 0; j < ref.grid.m; ++j)
      out << ref.t_level(k) << ',' << ref.grid.center(j) << ',' << ref.value(k, j) << '\n';
}

}  // namespace kpinn
