#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kpinn/fvref.hpp"
#include "kpinn/model.hpp"
#include "kpinn/train.hpp"

namespace kpinn {

// cartesian product of study axes; defaults reproduce the architecture study
struct SweepGrid {
  std::vector<Activation> activations{Activation::kTanh, Activation::kSin, Activation::kRelu};
  std::vector<std::pair<int, int>> shapes{{4, 64}, {4, 128}, {6, 128}, {6, 256}, {8, 256}};
  std::vector<int> epoch_budgets{2048, 4096, 5120, 10240};
  std::vector<int> colloc_counts{1024, 2048};
  std::vector<std::uint64_t> base_seeds{0};

  std::size_t size() const {
    return activations.size() * shapes.size() * epoch_budgets.size() * colloc_counts.size() *
           base_seeds.size();
  }
};

struct SweepRecord {
  // cell configuration
  Activation activation = Activation::kTanh;
  int depth = 4;
  int width = 64;
  int epochs = 4096;
  int n_r = 1024;
  int n_0 = 512;
  int n_q = 128;
  double lr = 1e-3;
  double lam_res = 1.0;
  double lam_ic = 1.0;
  InitialCondition ic = InitialCondition::kPolynomial;
  double K = 1.0;
  double T = 1.0;
  double eps = kPi / 32.0;
  std::uint64_t base_seed = 0;
  std::uint64_t seed = 0;  // derived per-cell training seed
  std::string init_scheme;
  int parallelism = 1;

  // outcome
  std::string status = "ok";  // ok | nonfinite | diverged
  double energy_norm = 0.0;
  double max_abs_error = 0.0;
  double final_l_res = 0.0;
  double final_l_ic = 0.0;
  double wall_seconds = 0.0;

  std::uint64_t fingerprint() const;  // stable hash of the configuration fields
};

// FNV-1a over the canonical config string; seed for a cell is
// mix_seed(base_seed, fingerprint)
std::uint64_t fnv1a(const std::string& s);

std::string record_csv_header();
std::string record_to_csv(const SweepRecord& rec);
SweepRecord record_from_csv(const std::string& line);

// append-only ledger (CSV) plus one JSON metadata file per cell, keyed by
// fingerprint; reopening the same directory resumes a partial sweep
class RecordStore {
 public:
  explicit RecordStore(const std::string& dir);

  bool contains(std::uint64_t fingerprint) const;
  const SweepRecord* find(std::uint64_t fingerprint) const;
  void append(const SweepRecord& rec);
  const std::vector<SweepRecord>& records() const { return records_; }
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::string ledger_path_;
  std::vector<SweepRecord> records_;
};

// trains and evaluates one cell; never throws — failures land in status
SweepRecord run_cell(const SweepRecord& cell, const RefSolution& ref);

// runs every grid cell not already in the store; the reference solution is
// computed once and shared
void run_sweep(const SweepGrid& grid, const ProblemSpec& spec, RecordStore& store,
               int parallelism = 1);

// expands the grid into configured (untrained) records with derived seeds
std::vector<SweepRecord> expand_grid(const SweepGrid& grid, const ProblemSpec& spec);

// non-dominated records under (wall_seconds, energy_norm), sorted by time
std::vector<SweepRecord> pareto_front(const std::vector<SweepRecord>& records);

struct ClaimCheck {
  std::string name;
  std::string status;  // pass | fail | skipped
  std::string detail;
};

// trend checks over whatever records are present; missing cells skip a check
std::vector<ClaimCheck> claim_checks(const std::vector<SweepRecord>& records);

// records.csv + pareto.csv + summary.txt under out_dir; returns the summary
std::string write_report(const std::vector<SweepRecord>& records, const std::string& out_dir);

}  // namespace kpinn
