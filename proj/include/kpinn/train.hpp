#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kpinn/fastloss.hpp"
#include "kpinn/model.hpp"
#include "kpinn/net.hpp"

namespace kpinn {

struct TrainConfig {
  int n_r = 1024;
  int n_0 = 512;
  int n_q = 128;
  int epochs = 4096;
  double lr = 1e-3;
  double lam_res = 1.0;
  double lam_ic = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  std::uint64_t seed = 0;
  bool resample = false;             // fresh collocation points every epoch
  std::vector<int> checkpoint_epochs;  // snapshots of the params mid-run

  void validate() const;
};

struct EpochLoss {
  double l_res = 0.0;
  double l_ic = 0.0;
  double l_total = 0.0;
};

enum class TrainStatus { kOk, kNonFinite };

struct TrainReport {
  std::vector<EpochLoss> history;  // one entry per completed epoch (pre-update loss)
  double wall_seconds = 0.0;
  ParamSet params;
  int epochs_completed = 0;
  TrainStatus status = TrainStatus::kOk;
  int failed_epoch = -1;  // 1-based epoch of the non-finite loss, if any
  std::vector<std::pair<int, ParamSet>> checkpoints;
};

struct AdamState {
  std::vector<double> m, v;
};

// one bias-corrected Adam update, t_step counted from 1
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               int t_step, const TrainConfig& cfg);

// true when the best loss seen has not improved by min_delta for `patience`
// consecutive entries at the end of the history
bool early_stop_monitor(std::span<const double> history, int patience, double min_delta);

// full-batch training: every epoch evaluates L_total over the whole
// collocation/IC sets and applies one Adam update; deterministic per seeds
TrainReport train(const NetConfig& net_cfg, const ProblemSpec& spec, const TrainConfig& cfg);

void write_history_csv(const std::string& path, std::span<const EpochLoss> history);

// flat binary checkpoint: magic/version header, architecture, seed, values
void save_checkpoint(const std::string& path, const NetConfig& cfg, const ParamSet& params);
std::pair<NetConfig, ParamSet> load_checkpoint(const std::string& path);

}  // namespace kpinn
