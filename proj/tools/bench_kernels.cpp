// compares the OpenMP batched kernels against the serial reference
// implementations: checks agreement, then reports times and speedups

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kpinn/kernels.hpp"
#include "kpinn/rng.hpp"

namespace {

using clock_t_ = std::chrono::steady_clock;

double time_call(const std::function<void()>& fn, int reps) {
  fn();  // warmup
  const auto t0 = clock_t_::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = clock_t_::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void fill(std::vector<double>& v, kpinn::SplitMix64& rng) {
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchmark: OpenMP kernels vs serial reference"};
  int ns = 8192, width = 128, reps = 20;
  app.add_option("--ns", ns, "batch size")->capture_default_str();
  app.add_option("--width", width, "layer width")->capture_default_str();
  app.add_option("--reps", reps, "timed repetitions")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  using namespace kpinn;
  SplitMix64 rng(42);
  const int in = width, out = width;
  const std::size_t nw = static_cast<std::size_t>(in) * out;
  const std::size_t nh = static_cast<std::size_t>(ns) * in;
  const std::size_t nz = static_cast<std::size_t>(ns) * out;

  std::vector<double> w(nw), wt(nw), b(out), h(nh), z(nz), zr(nz);
  std::vector<double> gout(nz), gin(nh), gin_r(nh), dw(nw), dw_r(nw), db(out), db_r(out);
  std::vector<double> zth(nz), zt(nz), hv(nz), hth(nz), ht(nz);
  std::vector<double> hv_r(nz), hth_r(nz), ht_r(nz);
  std::vector<double> gu(nz), gth(nz), gt(nz), au(nz), ath(nz), at(nz);
  std::vector<double> au_r(nz), ath_r(nz), at_r(nz);
  fill(w, rng);
  fill(b, rng);
  fill(h, rng);
  fill(gout, rng);
  fill(zth, rng);
  fill(zt, rng);
  fill(gu, rng);
  fill(gth, rng);
  fill(gt, rng);
  kern::transpose(out, in, w.data(), wt.data());

  const double gflop = 2.0 * ns * in * out * 1e-9;
  std::printf("batch %d, layer %dx%d, %d reps\n", ns, in, out, reps);
  std::printf("%-22s %12s %12s %9s %9s %10s\n", "kernel", "omp [ms]", "serial [ms]", "omp GF/s",
              "ser GF/s", "max|diff|");

  auto row = [&](const char* name, const std::function<void()>& par,
                 const std::function<void()>& ser, const std::vector<double>* pa,
                 const std::vector<double>* pb, bool has_flops) {
    par();
    ser();
    const double diff = pa ? max_abs_diff(*pa, *pb) : 0.0;
    const double tp = time_call(par, reps);
    const double ts = time_call(ser, reps);
    if (has_flops) {
      std::printf("%-22s %12.3f %12.3f %9.2f %9.2f %10.2e\n", name, tp * 1e3, ts * 1e3,
                  gflop / tp, gflop / ts, diff);
    } else {
      std::printf("%-22s %12.3f %12.3f %9s %9s %10.2e\n", name, tp * 1e3, ts * 1e3, "-", "-",
                  diff);
    }
  };

  row("affine_forward",
      [&] { kern::affine_forward(ns, in, out, h.data(), wt.data(), b.data(), z.data()); },
      [&] { kern::ref::affine_forward(ns, in, out, h.data(), wt.data(), b.data(), zr.data()); },
      &z, &zr, true);

  row("affine_backward_input",
      [&] { kern::affine_backward_input(ns, in, out, gout.data(), w.data(), gin.data()); },
      [&] { kern::ref::affine_backward_input(ns, in, out, gout.data(), w.data(), gin_r.data()); },
      &gin, &gin_r, true);

  row("affine_backward_params",
      [&] {
        std::fill(dw.begin(), dw.end(), 0.0);
        std::fill(db.begin(), db.end(), 0.0);
        kern::affine_backward_params(ns, in, out, gout.data(), h.data(), dw.data(), db.data());
      },
      [&] {
        std::fill(dw_r.begin(), dw_r.end(), 0.0);
        std::fill(db_r.begin(), db_r.end(), 0.0);
        kern::ref::affine_backward_params(ns, in, out, gout.data(), h.data(), dw_r.data(),
                                          db_r.data());
      },
      &dw, &dw_r, true);

  for (Activation act : {Activation::kTanh, Activation::kSin, Activation::kRelu}) {
    const std::string name = std::string("dual_act_forward/") + activation_name(act);
    row(name.c_str(),
        [&] {
          kern::dual_act_forward(act, nz, z.data(), zth.data(), zt.data(), hv.data(), hth.data(),
                                 ht.data());
        },
        [&] {
          kern::ref::dual_act_forward(act, nz, z.data(), zth.data(), zt.data(), hv_r.data(),
                                      hth_r.data(), ht_r.data());
        },
        &hth, &hth_r, false);
  }

  row("dual_act_backward/tanh",
      [&] {
        kern::dual_act_backward(Activation::kTanh, nz, hv.data(), hth.data(), ht.data(), nullptr,
                                nullptr, nullptr, gu.data(), gth.data(), gt.data(), au.data(),
                                ath.data(), at.data());
      },
      [&] {
        kern::ref::dual_act_backward(Activation::kTanh, nz, hv_r.data(), hth_r.data(),
                                     ht_r.data(), nullptr, nullptr, nullptr, gu.data(),
                                     gth.data(), gt.data(), au_r.data(), ath_r.data(),
                                     at_r.data());
      },
      &au, &au_r, false);

  std::vector<double> va(ns), vb(ns);
  fill(va, rng);
  fill(vb, rng);
  double acc = 0.0, acc_r = 0.0;
  row("dot",
      [&] { acc += kern::dot(ns, va.data(), vb.data()); },
      [&] { acc_r += kern::ref::dot(ns, va.data(), vb.data()); },
      nullptr, nullptr, false);
  if (!std::isfinite(acc + acc_r)) std::printf("dot accumulators non-finite!\n");

  return 0;
}
