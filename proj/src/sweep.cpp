#include "kpinn/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "kpinn/evalx.hpp"
#include "kpinn/rng.hpp"

namespace kpinn {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string config_string(const SweepRecord& r) {
  std::ostringstream os;
  os << activation_name(r.activation) << '|' << r.depth << '|' << r.width << '|' << r.epochs
     << '|' << r.n_r << '|' << r.n_0 << '|' << r.n_q << '|' << fmt(r.lr) << '|' << fmt(r.lam_res)
     << '|' << fmt(r.lam_ic) << '|' << ic_name(r.ic) << '|' << fmt(r.K) << '|' << fmt(r.T) << '|'
     << fmt(r.eps) << '|' << r.base_seed << '|' << r.init_scheme;
  return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

nlohmann::json record_to_json(const SweepRecord& r) {
  nlohmann::json j;
  j["fingerprint"] = r.fingerprint();
  j["activation"] = activation_name(r.activation);
  j["depth"] = r.depth;
  j["width"] = r.width;
  j["epochs"] = r.epochs;
  j["n_r"] = r.n_r;
  j["n_0"] = r.n_0;
  j["n_q"] = r.n_q;
  j["lr"] = r.lr;
  j["lam_res"] = r.lam_res;
  j["lam_ic"] = r.lam_ic;
  j["ic"] = ic_name(r.ic);
  j["K"] = r.K;
  j["T"] = r.T;
  j["eps"] = r.eps;
  j["base_seed"] = r.base_seed;
  j["seed"] = r.seed;
  j["init_scheme"] = r.init_scheme;
  j["parallelism"] = r.parallelism;
  j["status"] = r.status;
  j["energy_norm"] = r.energy_norm;
  j["max_abs_error"] = r.max_abs_error;
  j["final_l_res"] = r.final_l_res;
  j["final_l_ic"] = r.final_l_ic;
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t SweepRecord::fingerprint() const { return fnv1a(config_string(*this)); }

std::string record_csv_header() {
  return "fingerprint,status,activation,depth,width,epochs,n_r,n_0,n_q,lr,lam_res,lam_ic,ic,K,T,"
         "eps,base_seed,seed,init_scheme,parallelism,energy_norm,max_abs_error,final_l_res,"
         "final_l_ic,wall_seconds";
}

std::string record_to_csv(const SweepRecord& r) {
  std::ostringstream os;
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(r.fingerprint()));
  os << fp << ',' << r.status << ',' << activation_name(r.activation) << ',' << r.depth << ','
     << r.width << ',' << r.epochs << ',' << r.n_r << ',' << r.n_0 << ',' << r.n_q << ','
     << fmt(r.lr) << ',' << fmt(r.lam_res) << ',' << fmt(r.lam_ic) << ',' << ic_name(r.ic) << ','
     << fmt(r.K) << ',' << fmt(r.T) << ',' << fmt(r.eps) << ',' << r.base_seed << ',' << r.seed
     << ',' << r.init_scheme << ',' << r.parallelism << ',' << fmt(r.energy_norm) << ','
     << fmt(r.max_abs_error) << ',' << fmt(r.final_l_res) << ',' << fmt(r.final_l_ic) << ','
     << fmt(r.wall_seconds);
  return os.str();
}

SweepRecord record_from_csv(const std::string& line) {
  const auto f = split_csv(line);
  if (f.size() != 25) throw std::invalid_argument("sweep record: bad column count");
  SweepRecord r;
  r.status = f[1];
  r.activation = parse_activation(f[2]);
  r.depth = std::stoi(f[3]);
  r.width = std::stoi(f[4]);
  r.epochs = std::stoi(f[5]);
  r.n_r = std::stoi(f[6]);
  r.n_0 = std::stoi(f[7]);
  r.n_q = std::stoi(f[8]);
  r.lr = std::stod(f[9]);
  r.lam_res = std::stod(f[10]);
  r.lam_ic = std::stod(f[11]);
  r.ic = parse_ic(f[12]);
  r.K = std::stod(f[13]);
  r.T = std::stod(f[14]);
  r.eps = std::stod(f[15]);
  r.base_seed = std::stoull(f[16]);
  r.seed = std::stoull(f[17]);
  r.init_scheme = f[18];
  r.parallelism = std::stoi(f[19]);
  r.energy_norm = std::stod(f[20]);
  r.max_abs_error = std::stod(f[21]);
  r.final_l_res = std::stod(f[22]);
  r.final_l_ic = std::stod(f[23]);
  r.wall_seconds = std::stod(f[24]);
  const std::uint64_t fp = std::stoull(f[0], nullptr, 16);
  if (fp != r.fingerprint()) throw std::invalid_argument("sweep record: fingerprint mismatch");
  return r;
}

RecordStore::RecordStore(const std::string& dir) : dir_(dir), ledger_path_(dir + "/ledger.csv") {
  std::filesystem::create_directories(dir_);
  std::filesystem::create_directories(dir_ + "/cells");
  std::ifstream in(ledger_path_);
  if (!in) return;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == record_csv_header()) continue;
    }
    records_.push_back(record_from_csv(line));
  }
}

bool RecordStore::contains(std::uint64_t fingerprint) const {
  return find(fingerprint) != nullptr;
}

const SweepRecord* RecordStore::find(std::uint64_t fingerprint) const {
  for (const auto& r : records_) {
    if (r.fingerprint() == fingerprint) return &r;
  }
  return nullptr;
}

void RecordStore::append(const SweepRecord& rec) {
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(rec.fingerprint()));
  {
    std::ofstream j(dir_ + "/cells/" + fp + ".json");
    j << record_to_json(rec).dump(2) << "\n";
  }
  const bool fresh = !std::filesystem::exists(ledger_path_) ||
                     std::filesystem::file_size(ledger_path_) == 0;
  std::ofstream out(ledger_path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + ledger_path_);
  if (fresh) out << record_csv_header() << "\n";
  out << record_to_csv(rec) << "\n";
  out.flush();
  records_.push_back(rec);
}

std::vector<SweepRecord> expand_grid(const SweepGrid& grid, const ProblemSpec& spec) {
  std::vector<SweepRecord> cells;
  cells.reserve(grid.size());
  for (Activation act : grid.activations) {
    for (auto [depth, width] : grid.shapes) {
      for (int epochs : grid.epoch_budgets) {
        for (int n_r : grid.colloc_counts) {
          for (std::uint64_t bs : grid.base_seeds) {
            SweepRecord r;
            r.activation = act;
            r.depth = depth;
            r.width = width;
            r.epochs = epochs;
            r.n_r = n_r;
            r.ic = spec.ic;
            r.K = spec.K;
            r.T = spec.T;
            r.eps = spec.eps;
            r.base_seed = bs;
            r.init_scheme = init_scheme_name(act);
            r.seed = mix_seed(bs, r.fingerprint());
            cells.push_back(r);
          }
        }
      }
    }
  }
  return cells;
}

SweepRecord run_cell(const SweepRecord& cell, const RefSolution& ref) {
  SweepRecord r = cell;
  try {
    NetConfig net{r.depth, r.width, r.activation, r.seed};
    ProblemSpec spec{r.K, r.T, r.ic, r.eps};
    TrainConfig tc;
    tc.n_r = r.n_r;
    tc.n_0 = r.n_0;
    tc.n_q = r.n_q;
    tc.epochs = r.epochs;
    tc.lr = r.lr;
    tc.lam_res = r.lam_res;
    tc.lam_ic = r.lam_ic;
    tc.seed = r.seed;
    const TrainReport rep = train(net, spec, tc);
    r.wall_seconds = rep.wall_seconds;
    if (!rep.history.empty()) {
      r.final_l_res = rep.history.back().l_res;
      r.final_l_ic = rep.history.back().l_ic;
    }
    if (rep.status == TrainStatus::kNonFinite) {
      r.status = "nonfinite";
      r.energy_norm = std::numeric_limits<double>::quiet_NaN();
      return r;
    }
    const ErrorReport err = energy_norm(rep.params, net, ref);
    r.energy_norm = err.energy_norm;
    r.max_abs_error = err.max_abs_error;
    if (!std::isfinite(err.energy_norm) || err.energy_norm > 1e3) r.status = "diverged";
  } catch (const std::exception&) {
    r.status = "nonfinite";
    r.energy_norm = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

void run_sweep(const SweepGrid& grid, const ProblemSpec& spec, RecordStore& store,
               int parallelism) {
  auto cells = expand_grid(grid, spec);
  std::vector<SweepRecord> todo;
  for (auto& c : cells) {
    if (!store.contains(c.fingerprint())) todo.push_back(c);
  }
  if (todo.empty()) return;

  FvGrid fv_grid;
  const RefSolution ref = fv_solve(spec, fv_grid, 0.9);

  if (parallelism <= 1) {
    for (auto& c : todo) {
      c.parallelism = 1;
      store.append(run_cell(c, ref));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex store_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      todo[i].parallelism = parallelism;
      SweepRecord done = run_cell(todo[i], ref);
      std::lock_guard<std::mutex> lock(store_mutex);
      store.append(done);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < parallelism; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

std::vector<SweepRecord> pareto_front(const std::vector<SweepRecord>& records) {
  std::vector<SweepRecord> ok;
  for (const auto& r : records) {
    if (r.status == "ok" && std::isfinite(r.energy_norm)) ok.push_back(r);
  }
  std::vector<SweepRecord> front;
  for (const auto& a : ok) {
    bool dominated = false;
    for (const auto& b : ok) {
      if (b.wall_seconds <= a.wall_seconds && b.energy_norm <= a.energy_norm &&
          (b.wall_seconds < a.wall_seconds || b.energy_norm < a.energy_norm)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(a);
  }
  std::stable_sort(front.begin(), front.end(), [](const SweepRecord& a, const SweepRecord& b) {
    return a.wall_seconds < b.wall_seconds;
  });
  return front;
}

namespace {

const SweepRecord* find_cell(const std::vector<SweepRecord>& rs, Activation act, int depth,
                             int width, int epochs, int n_r) {
  for (const auto& r : rs) {
    if (r.status == "ok" && r.activation == act && r.depth == depth && r.width == width &&
        r.epochs == epochs && r.n_r == n_r) {
      return &r;
    }
  }
  return nullptr;
}

}  // namespace

std::vector<ClaimCheck> claim_checks(const std::vector<SweepRecord>& records) {
  std::vector<ClaimCheck> checks;

  {
    ClaimCheck c{"relu-inferior", "skipped", ""};
    double best_tanh = std::numeric_limits<double>::infinity();
    std::vector<const SweepRecord*> relu;
    for (const auto& r : records) {
      if (r.status != "ok") continue;
      if (r.activation == Activation::kTanh) best_tanh = std::min(best_tanh, r.energy_norm);
      if (r.activation == Activation::kRelu) relu.push_back(&r);
    }
    if (std::isfinite(best_tanh) && !relu.empty()) {
      double worst_ratio = std::numeric_limits<double>::infinity();
      for (const auto* r : relu) worst_ratio = std::min(worst_ratio, r->energy_norm / best_tanh);
      c.status = worst_ratio >= 10.0 ? "pass" : "fail";
      c.detail = "min relu/tanh error ratio " + fmt(worst_ratio) + " (need >= 10)";
    } else {
      c.detail = "needs at least one ok tanh and one ok relu record";
    }
    checks.push_back(c);
  }

  {
    ClaimCheck c{"width-helps", "skipped", ""};
    const auto* w64 = find_cell(records, Activation::kTanh, 4, 64, 4096, 1024);
    const auto* w128 = find_cell(records, Activation::kTanh, 4, 128, 4096, 1024);
    if (w64 && w128) {
      c.status = w128->energy_norm <= w64->energy_norm ? "pass" : "fail";
      c.detail = "err(4x128)=" + fmt(w128->energy_norm) + " vs err(4x64)=" + fmt(w64->energy_norm);
    } else {
      c.detail = "needs tanh 4x64 and 4x128 at epochs=4096, n_r=1024";
    }
    checks.push_back(c);
  }

  {
    ClaimCheck c{"epochs-help", "skipped", ""};
    const auto* e2048 = find_cell(records, Activation::kTanh, 4, 64, 2048, 1024);
    const auto* e4096 = find_cell(records, Activation::kTanh, 4, 64, 4096, 1024);
    if (e2048 && e4096) {
      c.status = e4096->energy_norm <= e2048->energy_norm / 1.3 ? "pass" : "fail";
      c.detail = "err(4096)=" + fmt(e4096->energy_norm) + " vs err(2048)/1.3=" +
                 fmt(e2048->energy_norm / 1.3);
    } else {
      c.detail = "needs tanh 4x64 at epochs 2048 and 4096, n_r=1024";
    }
    checks.push_back(c);
  }

  {
    ClaimCheck c{"colloc-saturates", "skipped", ""};
    const auto* r1024 = find_cell(records, Activation::kTanh, 4, 128, 4096, 1024);
    const auto* r2048 = find_cell(records, Activation::kTanh, 4, 128, 4096, 2048);
    if (r1024 && r2048) {
      const double rel = std::abs(r2048->energy_norm - r1024->energy_norm) / r1024->energy_norm;
      c.status = rel <= 0.25 ? "pass" : "fail";
      c.detail = "relative change " + fmt(rel) + " (need <= 0.25)";
    } else {
      c.detail = "needs tanh 4x128 at epochs=4096, n_r in {1024, 2048}";
    }
    checks.push_back(c);
  }

  return checks;
}

std::string write_report(const std::vector<SweepRecord>& records, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/records.csv");
    f << record_csv_header() << "\n";
    for (const auto& r : records) f << record_to_csv(r) << "\n";
  }
  const auto front = pareto_front(records);
  {
    std::ofstream f(out_dir + "/pareto.csv");
    f << record_csv_header() << "\n";
    for (const auto& r : front) f << record_to_csv(r) << "\n";
  }

  std::size_t n_ok = 0, n_nonfinite = 0, n_diverged = 0, n_parallel = 0;
  const SweepRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.status == "ok") {
      ++n_ok;
      if (!best || r.energy_norm < best->energy_norm) best = &r;
    } else if (r.status == "nonfinite") {
      ++n_nonfinite;
    } else {
      ++n_diverged;
    }
    if (r.parallelism > 1) ++n_parallel;
  }

  std::ostringstream os;
  os << "sweep report\n";
  os << "  records: " << records.size() << " (ok " << n_ok << ", nonfinite " << n_nonfinite
     << ", diverged " << n_diverged << ")\n";
  if (n_parallel > 0) {
    os << "  warning: " << n_parallel
       << " record(s) trained with parallelism > 1; wall times are not comparable\n";
  }
  if (best) {
    os << "  best: " << activation_name(best->activation) << " " << best->depth << "x"
       << best->width << " epochs=" << best->epochs << " n_r=" << best->n_r
       << " energy_norm=" << fmt(best->energy_norm) << "\n";
  }
  os << "  pareto front (" << front.size() << " cells):\n";
  for (const auto& r : front) {
    os << "    " << activation_name(r.activation) << " " << r.depth << "x" << r.width
       << " epochs=" << r.epochs << " n_r=" << r.n_r << " wall=" << fmt(r.wall_seconds)
       << "s energy_norm=" << fmt(r.energy_norm) << "\n";
  }
  os << "  claim checks:\n";
  for (const auto& c : claim_checks(records)) {
    const char* tag = c.status == "pass" ? "[PASS]" : (c.status == "fail" ? "[FAIL]" : "[SKIP]");
    os << "    " << tag << " " << c.name << ": " << c.detail << "\n";
  }

  const std::string summary = os.str();
  {
    std::ofstream f(out_dir + "/summary.txt");
    f << summary;
  }
  return summary;
}

}  // namespace kpinn
