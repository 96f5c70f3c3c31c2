#include "kpinn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string_view>

#include "kpinn/rng.hpp"
#include "kpinn/sample.hpp"

namespace kpinn {

namespace {

constexpr std::uint64_t kCollocStream = 0xC0110C;
constexpr std::uint64_t kIcStream = 0x1C0;

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

}  // namespace

void TrainConfig::validate() const {
  if (n_r < 1 || n_0 < 1 || n_q < 1)
    throw std::invalid_argument("TrainConfig: point counts must be >= 1");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
    throw std::invalid_argument("TrainConfig: betas must lie in (0,1)");
  if (!(eps_adam > 0.0)) throw std::invalid_argument("TrainConfig: eps_adam must be > 0");
  if (!(lam_res >= 0.0 && lam_ic >= 0.0))
    throw std::invalid_argument("TrainConfig: loss weights must be >= 0");
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               int t_step, const TrainConfig& cfg) {
  if (grad.size() != params.size()) throw std::invalid_argument("adam_step: shape mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw std::invalid_argument("adam_step: state shape mismatch");
  const double bc1 = 1.0 - std::pow(cfg.beta1, t_step);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t_step);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grad[k];
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g * g;
    const double mhat = state.m[k] / bc1;
    const double vhat = state.v[k] / bc2;
    params[k] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps_adam);
  }
}

bool early_stop_monitor(std::span<const double> history, int patience, double min_delta) {
  if (history.empty()) throw std::invalid_argument("early_stop_monitor: empty history");
  double best = history[0];
  int wait = 0;
  for (std::size_t k = 1; k < history.size(); ++k) {
    if (history[k] < best - min_delta) {
      best = history[k];
      wait = 0;
    } else {
      ++wait;
    }
  }
  return wait >= patience;
}

TrainReport train(const NetConfig& net_cfg, const ProblemSpec& spec, const TrainConfig& cfg) {
  net_cfg.validate();
  spec.validate();
  cfg.validate();

  const QuadratureRule quad = QuadratureRule::uniform(cfg.n_q);
  CollocationSet colloc = lhs_sample(cfg.n_r, spec.T, mix_seed(cfg.seed, kCollocStream));
  const ICSet ic = ic_sample(cfg.n_0, mix_seed(cfg.seed, kIcStream));

  TrainReport rep;
  rep.params = init_params(net_cfg);
  std::vector<double> grad(rep.params.values.size());
  AdamState state;

  auto fast = std::make_unique<FastLoss>(net_cfg, spec, quad, colloc, ic, cfg.lam_res,
                                         cfg.lam_ic);
  const auto t0 = std::chrono::steady_clock::now();
  for (int e = 1; e <= cfg.epochs; ++e) {
    if (cfg.resample && e > 1) {
      colloc = lhs_sample(cfg.n_r, spec.T,
                          mix_seed(cfg.seed, kCollocStream + static_cast<std::uint64_t>(e)));
      fast = std::make_unique<FastLoss>(net_cfg, spec, quad, colloc, ic, cfg.lam_res,
                                        cfg.lam_ic);
    }
    FastLoss::Losses losses;
    try {
      losses = fast->loss_and_grad(rep.params.values, grad);
    } catch (const NonFiniteError&) {
      rep.status = TrainStatus::kNonFinite;
      rep.failed_epoch = e;
      break;
    }
    rep.history.push_back({losses.l_res, losses.l_ic, losses.l_total});
    adam_step(rep.params.values, grad, state, e, cfg);
    rep.epochs_completed = e;
    if (std::find(cfg.checkpoint_epochs.begin(), cfg.checkpoint_epochs.end(), e) !=
        cfg.checkpoint_epochs.end())
      rep.checkpoints.emplace_back(e, rep.params);
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

void write_history_csv(const std::string& path, std::span<const EpochLoss> history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  out << "epoch,l_res,l_ic,l_total\n";
  for (std::size_t e = 0; e < history.size(); ++e)
    out << e + 1 << ',' << history[e].l_res << ',' << history[e].l_ic << ','
        << history[e].l_total << '\n';
}

// layout: "KPCK" | u32 version | i32 depth | i32 width | i32 activation |
// u64 seed | u64 count | count doubles, all native little-endian
void save_checkpoint(const std::string& path, const NetConfig& cfg, const ParamSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write("KPCK", 4);
  write_pod(out, std::uint32_t{1});
  write_pod(out, std::int32_t{cfg.depth});
  write_pod(out, std::int32_t{cfg.width});
  write_pod(out, static_cast<std::int32_t>(cfg.activation));
  write_pod(out, cfg.seed);
  write_pod(out, static_cast<std::uint64_t>(params.values.size()));
  out.write(reinterpret_cast<const char*>(params.values.data()),
            static_cast<std::streamsize>(params.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<NetConfig, ParamSet> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != "KPCK")
    throw std::runtime_error("corrupt checkpoint (bad magic): " + path);
  if (read_pod<std::uint32_t>(in) != 1)
    throw std::runtime_error("unsupported checkpoint version: " + path);
  NetConfig cfg;
  cfg.depth = read_pod<std::int32_t>(in);
  cfg.width = read_pod<std::int32_t>(in);
  const auto act = read_pod<std::int32_t>(in);
  cfg.seed = read_pod<std::uint64_t>(in);
  const auto count = read_pod<std::uint64_t>(in);
  if (!in || cfg.depth < 1 || cfg.width < 1 || act < 0 || act > 2)
    throw std::runtime_error("corrupt checkpoint header: " + path);
  cfg.activation = static_cast<Activation>(act);
  if (count != param_count(cfg.depth, cfg.width))
    throw std::runtime_error("checkpoint size does not match architecture: " + path);
  ParamSet params{ParamLayout{cfg.depth, cfg.width}, std::vector<double>(count)};
  in.read(reinterpret_cast<char*>(params.values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return {cfg, std::move(params)};
}

}  // namespace kpinn
