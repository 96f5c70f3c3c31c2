// Acceptance gate: runs the ten release criteria end to end and prints one
// [PASS]/[FAIL] line per criterion; the exit status is the number of
// failures.
//
// The long training runs are read from a cache directory ($KPINN_ACCEPT_DIR,
// default ./acceptance-cache) when a cell's run.json matches the required
// configuration exactly; missing cells are trained in-process with identical
// settings, which is slow but produces the same artifacts.  $KPINN_CLI may
// point at the command-line binary so the determinism criterion can exercise
// a full process round trip.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kpinn/activation.hpp"
#include "kpinn/diff.hpp"
#include "kpinn/evalx.hpp"
#include "kpinn/fastloss.hpp"
#include "kpinn/fvref.hpp"
#include "kpinn/model.hpp"
#include "kpinn/net.hpp"
#include "kpinn/rng.hpp"
#include "kpinn/sample.hpp"
#include "kpinn/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace kpinn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double x) {
  std::ostringstream os;
  os.setf(std::ios::scientific);
  os.precision(3);
  os << x;
  return os.str();
}

std::string fixed1(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << x;
  return os.str();
}

int g_failures = 0;

void run_criterion(int idx, const std::function<std::pair<bool, std::string>()>& body) {
  bool ok = false;
  std::string msg;
  try {
    std::tie(ok, msg) = body();
  } catch (const std::exception& e) {
    ok = false;
    msg = std::string("unexpected exception: ") + e.what();
  }
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << idx << ": " << msg << "\n"
            << std::flush;
  if (!ok) ++g_failures;
}

fs::path accept_dir() {
  const char* env = std::getenv("KPINN_ACCEPT_DIR");
  return fs::path(env && *env ? env : "acceptance-cache");
}

// ---------------------------------------------------------------------------
// trained-cell cache

struct CellKey {
  const char* name;
  Activation act;
  int depth, width, epochs, n_r;
  InitialCondition ic;
  std::vector<int> ckpts;
};

const CellKey kCellHeadline{"tanh_4x128_ep4096_nr1024_poly", Activation::kTanh,
                            4,        128,
                            4096,     1024,
                            InitialCondition::kPolynomial,   {}};
const CellKey kCellW64{"tanh_4x64_ep4096_nr1024_poly", Activation::kTanh,
                       4,       64,
                       4096,    1024,
                       InitialCondition::kPolynomial,  {2048}};
const CellKey kCellRelu{"relu_4x64_ep4096_nr1024_poly", Activation::kRelu,
                        4,       64,
                        4096,    1024,
                        InitialCondition::kPolynomial,  {}};
const CellKey kCellPiecewise{"tanh_4x64_ep2048_nr1024_piecewise", Activation::kTanh,
                             4,        64,
                             2048,     1024,
                             InitialCondition::kPiecewise,       {}};
const CellKey kCellNr2048{"tanh_4x128_ep4096_nr2048_poly", Activation::kTanh,
                          4,        128,
                          4096,     2048,
                          InitialCondition::kPolynomial,   {}};

struct CellResult {
  NetConfig net{};
  ParamSet params;
  std::map<int, ParamSet> snapshots;
  bool cached = false;
  bool ok_status = true;  // training finished without a non-finite loss
};

ProblemSpec problem_for(InitialCondition ic) {
  ProblemSpec spec;
  spec.ic = ic;
  return spec;  // K=1, T=1, default eps
}

bool net_matches(const NetConfig& got, const CellKey& key) {
  return got.depth == key.depth && got.width == key.width && got.activation == key.act &&
         got.seed == 0;
}

std::optional<CellResult> load_cached(const CellKey& key) {
  const fs::path dir = accept_dir() / key.name;
  std::ifstream jf(dir / "run.json");
  if (!jf) return std::nullopt;
  json run;
  try {
    jf >> run;
  } catch (...) {
    return std::nullopt;
  }
  const bool config_matches =
      run.value("activation", "") == activation_name(key.act) &&
      run.value("depth", -1) == key.depth && run.value("width", -1) == key.width &&
      run.value("epochs", -1) == key.epochs && run.value("n_r", -1) == key.n_r &&
      run.value("n_0", -1) == 512 && run.value("n_q", -1) == 128 &&
      run.value("lr", 0.0) == 1e-3 && run.value("lam_res", 0.0) == 1.0 &&
      run.value("lam_ic", 0.0) == 1.0 && run.value("seed", std::uint64_t(1)) == 0 &&
      run.value("resample", true) == false && run.value("ic", "") == ic_name(key.ic) &&
      run.value("K", 0.0) == 1.0 && run.value("T", 0.0) == 1.0;
  if (!config_matches) return std::nullopt;

  const std::string status = run.value("status", "");
  if (status == "ok" && run.value("epochs_completed", -1) != key.epochs) return std::nullopt;
  if (status != "ok" && key.act != Activation::kRelu) return std::nullopt;

  CellResult cell;
  cell.cached = true;
  cell.ok_status = status == "ok";
  try {
    auto [cfg, ps] = load_checkpoint((dir / "model.bin").string());
    if (!net_matches(cfg, key)) return std::nullopt;
    cell.net = cfg;
    cell.params = std::move(ps);
    for (int ep : key.ckpts) {
      auto [ccfg, cps] = load_checkpoint((dir / ("ckpt_" + std::to_string(ep) + ".bin")).string());
      if (!net_matches(ccfg, key)) return std::nullopt;
      cell.snapshots.emplace(ep, std::move(cps));
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return cell;
}

CellResult train_in_process(const CellKey& key) {
  std::cerr << "[note] cache miss for " << key.name << ": training in-process ("
            << key.epochs << " epochs)\n";
  NetConfig net{key.depth, key.width, key.act, 0};
  TrainConfig tc;
  tc.n_r = key.n_r;
  tc.epochs = key.epochs;
  tc.seed = 0;
  tc.checkpoint_epochs = key.ckpts;
  const TrainReport rep = train(net, problem_for(key.ic), tc);
  CellResult cell;
  cell.net = net;
  cell.params = rep.params;
  cell.ok_status = rep.status == TrainStatus::kOk;
  for (const auto& [ep, ps] : rep.checkpoints) cell.snapshots.emplace(ep, ps);
  return cell;
}

std::map<std::string, CellResult> g_cells;

const CellResult& cell(const CellKey& key) {
  auto it = g_cells.find(key.name);
  if (it != g_cells.end()) return it->second;
  std::optional<CellResult> cached = load_cached(key);
  CellResult cell = cached ? std::move(*cached) : train_in_process(key);
  return g_cells.emplace(key.name, std::move(cell)).first->second;
}

// ---------------------------------------------------------------------------
// finite-volume references (M=512, 205 levels, cfl 0.9)

std::map<int, RefSolution> g_refs;

const RefSolution& reference(InitialCondition ic) {
  auto it = g_refs.find(static_cast<int>(ic));
  if (it != g_refs.end()) return it->second;
  const ProblemSpec spec = problem_for(ic);
  const fs::path file = accept_dir() / (std::string("ref_") + ic_name(ic) + ".bin");
  if (fs::exists(file)) {
    try {
      RefSolution ref = load_ref_binary(file.string());
      if (ref.grid.m == 512 && ref.grid.n_t == 205 && ref.cfl == 0.9 &&
          ref.problem.ic == ic && ref.problem.K == spec.K && ref.problem.T == spec.T) {
        return g_refs.emplace(static_cast<int>(ic), std::move(ref)).first->second;
      }
    } catch (const std::exception&) {
    }
  }
  return g_refs.emplace(static_cast<int>(ic), fv_solve(spec, FvGrid{512, 205}, 0.9))
      .first->second;
}

double cell_energy(const CellKey& key) {
  const CellResult& c = cell(key);
  if (!c.ok_status) return std::numeric_limits<double>::infinity();
  const double e =
      energy_norm(c.params, c.net, reference(key.ic), problem_for(key.ic)).energy_norm;
  return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// criterion 1 helpers

// smallest |pre-activation| of any hidden unit over the given inputs; used to
// keep ReLU trials away from kinks so central differences are meaningful
double min_kink_margin(const NetConfig& cfg, const ParamSet& ps,
                       const std::vector<std::pair<double, double>>& inputs) {
  const ParamLayout lay = layout_for(cfg);
  double margin = std::numeric_limits<double>::infinity();
  std::vector<double> h, z;
  for (const auto& [theta, t] : inputs) {
    h = {theta, t};
    for (int l = 0; l < lay.depth; ++l) {
      const int in = lay.in_dim(l);
      const int out = lay.out_dim(l);
      const double* w = ps.values.data() + lay.weight_offset(l);
      const double* b = ps.values.data() + lay.bias_offset(l);
      z.assign(static_cast<std::size_t>(out), 0.0);
      for (int a = 0; a < out; ++a) {
        double acc = b[a];
        for (int c = 0; c < in; ++c) acc += w[a * in + c] * h[static_cast<std::size_t>(c)];
        z[static_cast<std::size_t>(a)] = acc;
        margin = std::min(margin, std::abs(acc));
      }
      h.resize(static_cast<std::size_t>(out));
      for (int a = 0; a < out; ++a)
        h[static_cast<std::size_t>(a)] =
            eval_activation(cfg.activation, z[static_cast<std::size_t>(a)]).h;
    }
  }
  return margin;
}

std::vector<std::pair<double, double>> all_loss_inputs(const QuadratureRule& quad,
                                                       const CollocationSet& colloc,
                                                       const ICSet& icp) {
  std::vector<std::pair<double, double>> pts = colloc.points;
  for (const auto& [theta, t] : colloc.points) {
    (void)theta;
    for (double phi : quad.nodes) pts.emplace_back(phi, t);
  }
  for (double theta : icp.points) pts.emplace_back(theta, 0.0);
  return pts;
}

// ||a - b||_2 / ||b||_2
double vec_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// worst per-component relative error; tiny components are measured against a
// floor of 1e-2 * max|b| so zero-crossings do not inflate the ratio
double comp_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double bmax = 0.0;
  for (double v : b) bmax = std::max(bmax, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double den = std::max(std::abs(b[i]), std::max(1e-2 * bmax, 1e-300));
    worst = std::max(worst, std::abs(a[i] - b[i]) / den);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// criteria

std::pair<bool, std::string> criterion1() {
  const auto t0 = Clock::now();
  constexpr double kTol = 1e-5;
  const ProblemSpec spec = problem_for(InitialCondition::kPolynomial);
  const QuadratureRule quad = QuadratureRule::uniform(128);
  const Activation acts[3] = {Activation::kTanh, Activation::kSin, Activation::kRelu};

  double worst_param = 0.0, worst_input = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const Activation act = acts[trial % 3];
    SplitMix64 shape_rng(mix_seed(0xACCE97, static_cast<std::uint64_t>(trial)));
    const int depth = 1 + static_cast<int>(shape_rng.bounded(3));
    const int width = 2 + static_cast<int>(shape_rng.bounded(7));
    const NetConfig cfg{depth, width, act, 1000 + static_cast<std::uint64_t>(trial)};
    ParamSet ps = init_params(cfg);
    if (act == Activation::kRelu) {
      // zero-init biases put whole dead regions exactly on the kink (the
      // next layer sees z == bias == 0 wherever a full layer is inactive),
      // where the loss is not differentiable; jitter the biases so the
      // criterion's differentiability requirement can be met at all
      SplitMix64 jitter(mix_seed(cfg.seed, 0xB1A5));
      const ParamLayout lay = layout_for(cfg);
      for (int l = 0; l < lay.layer_count(); ++l)
        for (int a = 0; a < lay.out_dim(l); ++a)
          ps.values[lay.bias_offset(l) + static_cast<std::size_t>(a)] =
              jitter.uniform(-0.2, 0.2);
    }

    // for ReLU, redraw the sample sets until every hidden pre-activation is
    // bounded away from the kink on every input the loss touches
    CollocationSet colloc;
    ICSet icp;
    for (int attempt = 0;; ++attempt) {
      colloc = lhs_sample(6, spec.T, mix_seed(cfg.seed, 77 + static_cast<std::uint64_t>(attempt)));
      icp = ic_sample(6, mix_seed(cfg.seed, 770 + static_cast<std::uint64_t>(attempt)));
      if (act != Activation::kRelu || attempt > 40) break;
      if (min_kink_margin(cfg, ps, all_loss_inputs(quad, colloc, icp)) > 1e-4) break;
    }

    FastLoss fl(cfg, spec, quad, colloc, icp, 1.0, 1.0);
    std::vector<double> g_fast(ps.values.size());
    const FastLoss::Losses losses = fl.loss_and_grad(ps.values, g_fast);
    const auto [l_taped, g_taped] = grad_loss(ps, cfg, [&](TapeNet& net) {
      return taped_total_loss(net, spec, quad, colloc.points, icp.points, 1.0, 1.0);
    });
    if (std::abs(losses.l_total - l_taped) > 1e-10 * std::max(1.0, std::abs(l_taped)))
      return {false, "fast and taped loss values disagree: " + sci(losses.l_total) + " vs " +
                         sci(l_taped)};

    // central differences of L_total in every parameter
    std::vector<double> g_fd(ps.values.size());
    std::vector<double> p = ps.values;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double pk = p[k];
      const double h =
          act == Activation::kRelu ? 1e-7 : 1e-5 * std::max(1.0, std::abs(pk));
      p[k] = pk + h;
      const double lp = fl.loss_only(p).l_total;
      p[k] = pk - h;
      const double lm = fl.loss_only(p).l_total;
      p[k] = pk;
      g_fd[k] = (lp - lm) / (2.0 * h);
    }
    const double trial_worst = std::max({vec_rel(g_taped, g_fd), vec_rel(g_fast, g_fd),
                                         comp_rel(g_taped, g_fd), comp_rel(g_fast, g_fd)});
    if (std::getenv("KPINN_ACCEPT_VERBOSE")) {
      std::cerr << "  trial " << trial << " " << activation_name(act) << " " << depth << "x"
                << width << ": vec " << sci(vec_rel(g_taped, g_fd)) << "/"
                << sci(vec_rel(g_fast, g_fd)) << " comp " << sci(comp_rel(g_taped, g_fd))
                << "/" << sci(comp_rel(g_fast, g_fd)) << "\n";
      if (trial_worst > 1e-5) {
        double gmax = 0.0;
        for (double v : g_fd) gmax = std::max(gmax, std::abs(v));
        std::size_t kw = 0;
        double worst_here = 0.0;
        for (std::size_t k = 0; k < g_fd.size(); ++k) {
          const double den = std::max(std::abs(g_fd[k]), 1e-2 * gmax);
          const double r = std::abs(g_taped[k] - g_fd[k]) / den;
          if (r > worst_here) {
            worst_here = r;
            kw = k;
          }
        }
        std::cerr << "    worst comp k=" << kw << " g_fd=" << sci(g_fd[kw])
                  << " g_ad=" << sci(g_taped[kw]) << " p=" << sci(ps.values[kw])
                  << " gmax=" << sci(gmax) << " L=" << sci(losses.l_total) << " margin="
                  << sci(min_kink_margin(cfg, ps, all_loss_inputs(quad, colloc, icp)))
                  << "\n";
      }
    }
    worst_param = std::max(worst_param, trial_worst);

    // input partials at probe points (kept off ReLU kinks as well)
    SplitMix64 probe_rng(mix_seed(cfg.seed, 0xF00D));
    for (int j = 0; j < 3; ++j) {
      double theta = 0.0, t = 0.0;
      for (int attempt = 0; attempt < 50; ++attempt) {
        theta = probe_rng.uniform(0.0, kTwoPi);
        t = probe_rng.uniform(0.0, spec.T);
        if (act != Activation::kRelu) break;
        if (min_kink_margin(cfg, ps, {{theta, t}}) > 1e-4) break;
      }
      const ValueWithPartials v = eval_with_input_partials(ps, cfg, theta, t);
      const double h = act == Activation::kRelu ? 1e-7 : 1e-6;
      const double fd_th =
          (forward(ps, cfg, theta + h, t) - forward(ps, cfg, theta - h, t)) / (2.0 * h);
      const double fd_t =
          (forward(ps, cfg, theta, t + h) - forward(ps, cfg, theta, t - h)) / (2.0 * h);
      worst_input = std::max(
          worst_input, std::abs(v.du_dtheta - fd_th) / std::max(std::abs(fd_th), 1e-3));
      worst_input =
          std::max(worst_input, std::abs(v.du_dt - fd_t) / std::max(std::abs(fd_t), 1e-3));
    }
  }

  const double secs = seconds_since(t0);
  const bool ok = worst_param < kTol && worst_input < kTol && secs < 60.0;
  return {ok, "gradients vs central differences on 25 random nets: worst rel " +
                  sci(worst_param) + " (params), " + sci(worst_input) + " (input partials), tol " +
                  sci(kTol) + " (" + fixed1(secs) + " s < 60 s)"};
}

std::pair<bool, std::string> criterion2() {
  constexpr double kTol = 1e-10;
  const ProblemSpec spec = problem_for(InitialCondition::kPolynomial);  // K = 1
  const QuadratureRule quad = QuadratureRule::uniform(128);

  std::vector<double> ones(128, 1.0), cosns(128), sinns(128);
  for (int j = 0; j < 128; ++j) {
    cosns[static_cast<std::size_t>(j)] = std::cos(quad.nodes[static_cast<std::size_t>(j)]);
    sinns[static_cast<std::size_t>(j)] = std::sin(quad.nodes[static_cast<std::size_t>(j)]);
  }

  SplitMix64 rng(0xC2);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double theta = rng.uniform(0.0, kTwoPi);
    worst = std::max(worst, std::abs(velocity_from_values(spec, quad, ones, theta) - 0.0));
    worst = std::max(worst, std::abs(velocity_from_values(spec, quad, cosns, theta) -
                                     (-kPi * std::sin(theta))));
    worst = std::max(worst, std::abs(velocity_from_values(spec, quad, sinns, theta) -
                                     (kPi * std::cos(theta))));
  }
  return {worst < kTol, "quadrature velocity vs closed forms {0, -pi sin, pi cos}: worst abs "
                            "error " + sci(worst) + " < " + sci(kTol) + " at 100 random angles"};
}

std::pair<bool, std::string> criterion3() {
  const auto t0 = Clock::now();
  const ProblemSpec spec = problem_for(InitialCondition::kPolynomial);

  // always solved fresh here so the runtime bound covers the computation
  const RefSolution ref = fv_solve(spec, FvGrid{512, 205}, 0.9);
  double worst_mass = 0.0;
  for (int k = 0; k < ref.grid.n_t; ++k)
    worst_mass = std::max(worst_mass, std::abs(ref.mass(k) - 1.0));

  const std::vector<int> ms{64, 128, 256, 512};
  const std::vector<ConvergenceRow> rows = fv_convergence_study(spec, ms, 0.9);
  const double order = fitted_order(rows);

  const double secs = seconds_since(t0);
  const bool ok = worst_mass <= 1e-10 && order >= 0.7 && order <= 1.3 && secs < 120.0;
  return {ok, "finite-volume validity: worst mass drift " + sci(worst_mass) +
                  " over 205 levels (tol 1e-10), self-convergence order " + sci(order) +
                  " in [0.7, 1.3] (" + fixed1(secs) + " s < 120 s)"};
}

std::pair<bool, std::string> criterion4() {
  constexpr double kThreshold = 5e-4;
  const double e = cell_energy(kCellHeadline);
  const bool ok = e <= kThreshold;
  return {ok, std::string("headline accuracy: energy norm ") + sci(e) +
                  (ok ? " <= " : " > ") + sci(kThreshold) +
                  " for tanh 4x128, 4096 epochs, N_r=1024, vs the M=512 reference" +
                  (cell(kCellHeadline).cached ? " (cached model)" : "")};
}

std::pair<bool, std::string> criterion5() {
  const CellResult& c = cell(kCellW64);
  const auto it = c.snapshots.find(2048);
  if (it == c.snapshots.end()) return {false, "missing 2048-epoch snapshot for tanh 4x64"};
  const ProblemSpec spec = problem_for(InitialCondition::kPolynomial);
  const RefSolution& ref = reference(InitialCondition::kPolynomial);
  const double e_half = energy_norm(it->second, c.net, ref, spec).energy_norm;
  const double e_full = energy_norm(c.params, c.net, ref, spec).energy_norm;
  const bool ok = e_full <= e_half / 1.3;
  return {ok, "epoch trend (tanh 4x64): error " + sci(e_full) + " at 4096 epochs vs " +
                  sci(e_half) + " at 2048; need <= " + sci(e_half / 1.3) +
                  " (factor 1.3, same seed)"};
}

std::pair<bool, std::string> criterion6() {
  const double e128 = cell_energy(kCellHeadline);
  const double e64 = cell_energy(kCellW64);
  const bool ok = e128 <= e64;
  return {ok, "width trend (tanh, depth 4, 4096 epochs): error " + sci(e128) +
                  " at width 128 vs " + sci(e64) + " at width 64 (same seed)"};
}

std::pair<bool, std::string> criterion7() {
  const double e_relu = cell_energy(kCellRelu);
  const double best_tanh =
      std::min({cell_energy(kCellHeadline), cell_energy(kCellW64), cell_energy(kCellNr2048)});
  const bool ok = e_relu >= 10.0 * best_tanh;
  std::string relu_str = std::isfinite(e_relu) ? sci(e_relu) : "inf (diverged)";
  return {ok, "relu failure: relu 4x64 energy norm " + relu_str + " vs best tanh " +
                  sci(best_tanh) + "; need >= 10x (ratio " +
                  (std::isfinite(e_relu) ? sci(e_relu / best_tanh) : std::string("inf")) + ")"};
}

std::pair<bool, std::string> criterion8() {
  const double e1024 = cell_energy(kCellHeadline);
  const double e2048 = cell_energy(kCellNr2048);
  const double change = std::abs(e2048 - e1024) / e1024;
  const bool ok = change <= 0.25;
  return {ok, "collocation saturation (tanh 4x128): error " + sci(e1024) + " at N_r=1024 vs " +
                  sci(e2048) + " at N_r=2048, relative change " + sci(change) + " <= 0.25"};
}

// 25% -> 75% transition width of an ascending jump near `center`, linearly
// interpolated between plot samples; +inf when the profile never reaches the
// 75% level inside the window (extreme oversmoothing)
double transition_width(const std::vector<double>& thetas, const std::vector<double>& u,
                        double center, bool ascending) {
  const double low = 1.0 / (3.0 * kPi);
  const double jump = 1.0 / (3.0 * kPi);
  const double lo_level = low + 0.25 * jump;
  const double hi_level = low + 0.75 * jump;

  std::vector<std::size_t> win;
  for (std::size_t k = 0; k < thetas.size(); ++k)
    if (std::abs(thetas[k] - center) <= 1.0) win.push_back(k);

  auto level = [&](std::size_t k) { return ascending ? u[win[k]] : 2.0 * low + jump - u[win[k]]; };

  std::size_t khi = win.size();
  for (std::size_t k = 0; k < win.size(); ++k)
    if (level(k) >= hi_level) {
      khi = k;
      break;
    }
  if (khi == win.size()) return std::numeric_limits<double>::infinity();

  std::size_t klo = 0;
  bool found_lo = false;
  for (std::size_t k = khi; k-- > 0;)
    if (level(k) <= lo_level) {
      klo = k;
      found_lo = true;
      break;
    }

  double th_hi = thetas[win[khi]];
  if (khi > 0) {
    const double a = level(khi - 1), b = level(khi);
    th_hi = thetas[win[khi - 1]] +
            (thetas[win[khi]] - thetas[win[khi - 1]]) * (hi_level - a) / (b - a);
  }
  double th_lo = thetas[win[klo]];
  if (found_lo && klo + 1 < win.size()) {
    const double a = level(klo), b = level(klo + 1);
    if (b > a)
      th_lo = thetas[win[klo]] +
              (thetas[win[klo + 1]] - thetas[win[klo]]) * (lo_level - a) / (b - a);
  }
  return th_hi - th_lo;
}

std::pair<bool, std::string> criterion9() {
  const int m_plot = 2048;
  const double dtheta_plot = kTwoPi / m_plot;
  const double low = 1.0 / (3.0 * kPi);
  const double jump = 1.0 / (3.0 * kPi);

  const CellResult& c = cell(kCellPiecewise);
  const ProfileTable t0 = profile(c.params, c.net, std::vector<double>{0.0}, m_plot);
  std::vector<double> u(static_cast<std::size_t>(m_plot));
  for (int r = 0; r < m_plot; ++r) u[static_cast<std::size_t>(r)] = t0.value(r, 0);

  // every finite-difference slope must stay below jump / (2 dtheta): the
  // steepest admissible profile spreads the jump over at least two plot cells
  double max_step = 0.0;
  double tv = 0.0;
  for (int k = 0; k + 1 < m_plot; ++k) {
    const double d = std::abs(u[static_cast<std::size_t>(k) + 1] - u[static_cast<std::size_t>(k)]);
    max_step = std::max(max_step, d);
    tv += d;
  }
  const bool slope_ok = max_step < 0.5 * jump;

  const double w_up = transition_width(t0.thetas, u, kPi / 2.0, true);
  const double w_dn = transition_width(t0.thetas, u, 3.0 * kPi / 2.0, false);
  const double w_min = std::min(w_up, w_dn);
  const bool width_ok = w_min > 4.0 * dtheta_plot;

  const double tv_true = 2.0 * jump;
  const bool tv_ok = tv >= 0.8 * tv_true && tv <= 3.0 * tv_true;

  // the reference resolves the same jumps within single cells: count cells
  // whose t=0 value sits strictly between the two plateau levels
  const RefSolution& ref = reference(InitialCondition::kPiecewise);
  int mid_cells = 0;
  for (int j = 0; j < ref.grid.m; ++j) {
    const double v = ref.value(0, j);
    if (v > low + 0.1 * jump && v < low + 0.9 * jump) ++mid_cells;
  }
  const bool ref_ok = mid_cells <= 2;  // at most one intermediate cell per jump

  const fs::path out = accept_dir();
  fs::create_directories(out);
  write_profile_csv((out / "c9_profile_pinn.csv").string(),
                    profile(c.params, c.net, std::vector<double>{0.0, 0.5, 1.0}, m_plot));
  if (!fs::exists(out / "ref_piecewise.csv"))
    save_ref_csv((out / "ref_piecewise.csv").string(), ref);

  const bool ok = slope_ok && width_ok && tv_ok && ref_ok;
  std::string w_str = std::isfinite(w_min) ? fixed1(w_min / dtheta_plot) : "inf";
  return {ok, "oversmoothing (piecewise IC, t=0, 2048 points): max step " + sci(max_step) +
                  " < " + sci(0.5 * jump) + ", transition width " + w_str +
                  " plot cells (> 4), reference jump spans " + std::to_string(mid_cells) +
                  " mid cells (<= 2), TV " + sci(tv) + " in [" + sci(0.8 * tv_true) + ", " +
                  sci(3.0 * tv_true) + "]; profiles in " + out.string()};
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

std::pair<bool, std::string> criterion10() {
  const ProblemSpec spec = problem_for(InitialCondition::kPolynomial);
  const RefSolution& ref = reference(InitialCondition::kPolynomial);

  const char* cli = std::getenv("KPINN_CLI");
  if (cli && fs::exists(cli)) {
    const fs::path tmp = accept_dir() / "c10_runs";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const std::string flags =
        " train --activation tanh --depth 3 --width 24 --epochs 96 --colloc 256"
        " --ic-points 128 --seed 11 --out-dir ";
    for (const char* sub : {"a", "b"}) {
      const std::string cmd = std::string("\"") + cli + "\"" + flags +
                              (tmp / sub).string() + " > " + (tmp / sub).string() +
                              ".json 2>&1";
      if (std::system(cmd.c_str()) != 0)
        return {false, std::string("train run '") + sub + "' exited nonzero"};
    }
    const bool hist_same = same_bytes(tmp / "a" / "history.csv", tmp / "b" / "history.csv");
    const bool model_same = same_bytes(tmp / "a" / "model.bin", tmp / "b" / "model.bin");
    auto [cfg_a, ps_a] = load_checkpoint((tmp / "a" / "model.bin").string());
    auto [cfg_b, ps_b] = load_checkpoint((tmp / "b" / "model.bin").string());
    const double e_a = energy_norm(ps_a, cfg_a, ref, spec).energy_norm;
    const double e_b = energy_norm(ps_b, cfg_b, ref, spec).energy_norm;
    fs::remove_all(tmp);
    const bool ok = hist_same && model_same && e_a == e_b;
    return {ok, std::string("determinism (CLI, repeated identical flags): history ") +
                    (hist_same ? "identical" : "DIFFERS") + ", model " +
                    (model_same ? "identical" : "DIFFERS") + ", energy norm " + sci(e_a) +
                    (e_a == e_b ? " == " : " != ") + sci(e_b)};
  }

  // no CLI binary available: repeat the library call instead
  NetConfig net{3, 24, Activation::kTanh, 11};
  TrainConfig tc;
  tc.n_r = 256;
  tc.n_0 = 128;
  tc.epochs = 96;
  tc.seed = 11;
  const TrainReport a = train(net, spec, tc);
  const TrainReport b = train(net, spec, tc);
  bool hist_same = a.history.size() == b.history.size();
  for (std::size_t i = 0; hist_same && i < a.history.size(); ++i)
    hist_same = a.history[i].l_res == b.history[i].l_res &&
                a.history[i].l_ic == b.history[i].l_ic &&
                a.history[i].l_total == b.history[i].l_total;
  const bool params_same = a.params.values == b.params.values;
  const double e_a = energy_norm(a.params, net, ref, spec).energy_norm;
  const double e_b = energy_norm(b.params, net, ref, spec).energy_norm;
  const bool ok = hist_same && params_same && e_a == e_b;
  return {ok, std::string("determinism (in-process, repeated identical config): history ") +
                  (hist_same ? "identical" : "DIFFERS") + ", params " +
                  (params_same ? "identical" : "DIFFERS") + ", energy norm " + sci(e_a) +
                  (e_a == e_b ? " == " : " != ") + sci(e_b)};
}

}  // namespace

int main(int argc, char** argv) {
  // optional arguments select a subset of criteria, e.g. `acceptance 1 2 3`
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  auto selected = [&](int idx) {
    return wanted.empty() || std::find(wanted.begin(), wanted.end(), idx) != wanted.end();
  };

  std::cout << "kpinn acceptance gate (cache: " << accept_dir().string() << ")\n" << std::flush;
  const std::pair<int, std::function<std::pair<bool, std::string>()>> criteria[] = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
  int ran = 0;
  for (const auto& [idx, body] : criteria)
    if (selected(idx)) {
      run_criterion(idx, body);
      ++ran;
    }
  if (g_failures == 0)
    std::cout << "all " << ran << " selected criteria passed\n";
  else
    std::cout << g_failures << " criterion(s) failed\n";
  return g_failures;
}
