// kpinn: train / evaluate / sweep the Kuramoto transport PINN and build
// finite-volume reference solutions.  Exit codes: 0 ok, 2 usage/config,
// 3 non-finite numerics, 4 io, 5 internal; failures also emit one JSON line
// on stderr with {"category": ..., "message": ...}.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kpinn/evalx.hpp"
#include "kpinn/fvref.hpp"
#include "kpinn/sweep.hpp"
#include "kpinn/train.hpp"

namespace {

using nlohmann::json;

std::string default_out_dir() {
  const char* env = std::getenv("KPINN_OUT_DIR");
  return (env && *env) ? std::string(env) : std::string("kpinn-out");
}

int fail(const std::string& category, const std::string& message, int code) {
  std::cerr << json{{"category", category}, {"message", message}}.dump() << "\n";
  return code;
}

struct ProblemOpts {
  std::string ic = "poly";
  double K = 1.0;
  double T = 1.0;
  double eps = kpinn::kPi / 32.0;

  kpinn::ProblemSpec spec() const {
    kpinn::ProblemSpec s;
    s.ic = kpinn::parse_ic(ic);
    s.K = K;
    s.T = T;
    s.eps = eps;
    s.validate();
    return s;
  }
};

void add_problem_opts(CLI::App* sub, ProblemOpts& p) {
  sub->add_option("--ic", p.ic, "initial condition: poly|dirac|piecewise")
      ->capture_default_str();
  sub->add_option("--K", p.K, "coupling strength")->capture_default_str();
  sub->add_option("--T", p.T, "final time")->capture_default_str();
  sub->add_option("--eps", p.eps, "dirac mollifier half-width")->capture_default_str();
}

std::pair<int, int> parse_shape(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= s.size()) {
    throw std::invalid_argument("bad shape '" + s + "', expected DxW like 4x64");
  }
  return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
}

json report_to_json(const kpinn::ErrorReport& rep) {
  return json{{"energy_norm", rep.energy_norm},
              {"max_abs_error", rep.max_abs_error},
              {"n_eval", rep.n_eval}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kuramoto transport PINN trainer and finite-volume reference solver"};
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();
  app.add_option("--out-dir", out_dir, "output directory (default $KPINN_OUT_DIR or ./kpinn-out)")
      ->capture_default_str();

  // --- solve-ref ---
  auto* sc_ref = app.add_subcommand("solve-ref", "build a finite-volume reference solution");
  ProblemOpts ref_p;
  add_problem_opts(sc_ref, ref_p);
  int ref_m = 512, ref_levels = 205;
  double ref_cfl = 0.9;
  sc_ref->add_option("--grid", ref_m, "spatial cells")->capture_default_str();
  sc_ref->add_option("--levels", ref_levels, "stored time levels")->capture_default_str();
  sc_ref->add_option("--cfl", ref_cfl, "CFL number")->capture_default_str();

  // --- train ---
  auto* sc_train = app.add_subcommand("train", "train one network configuration");
  ProblemOpts train_p;
  add_problem_opts(sc_train, train_p);
  std::string activation = "tanh";
  kpinn::TrainConfig tc;
  int depth = 4, width = 64;
  std::uint64_t seed = 0;
  std::vector<int> checkpoint_at;
  sc_train->add_option("--activation", activation, "tanh|sin|relu")->capture_default_str();
  sc_train->add_option("--depth", depth, "hidden layers")->capture_default_str();
  sc_train->add_option("--width", width, "neurons per hidden layer")->capture_default_str();
  sc_train->add_option("--epochs", tc.epochs, "Adam epochs")->capture_default_str();
  sc_train->add_option("--colloc", tc.n_r, "interior collocation points")->capture_default_str();
  sc_train->add_option("--ic-points", tc.n_0, "initial-condition points")->capture_default_str();
  sc_train->add_option("--quad", tc.n_q, "velocity quadrature nodes")->capture_default_str();
  sc_train->add_option("--lr", tc.lr, "Adam learning rate")->capture_default_str();
  sc_train->add_option("--lam-res", tc.lam_res, "residual loss weight")->capture_default_str();
  sc_train->add_option("--lam-ic", tc.lam_ic, "IC loss weight")->capture_default_str();
  sc_train->add_option("--seed", seed, "master seed")->capture_default_str();
  sc_train->add_flag("--resample", tc.resample, "draw fresh collocation points every epoch");
  sc_train->add_option("--checkpoint-at", checkpoint_at, "epochs to snapshot")->delimiter(',');

  // --- eval ---
  auto* sc_eval = app.add_subcommand("eval", "energy norm of a trained model vs a reference");
  std::string eval_model, eval_ref;
  ProblemOpts eval_p;
  sc_eval->add_option("--model", eval_model, "checkpoint file")->required();
  sc_eval->add_option("--ref", eval_ref, "reference binary")->required();
  add_problem_opts(sc_eval, eval_p);

  // --- profile ---
  auto* sc_prof = app.add_subcommand("profile", "tabulate model profiles u(theta, t)");
  std::string prof_model;
  std::vector<double> prof_t{0.0, 0.5, 1.0};
  int prof_points = 2048;
  sc_prof->add_option("--model", prof_model, "checkpoint file")->required();
  sc_prof->add_option("--t", prof_t, "time values")->delimiter(',')->capture_default_str();
  sc_prof->add_option("--points", prof_points, "plot resolution")->capture_default_str();

  // --- sweep ---
  auto* sc_sweep = app.add_subcommand("sweep", "run the architecture/budget study");
  ProblemOpts sweep_p;
  add_problem_opts(sc_sweep, sweep_p);
  std::vector<std::string> sw_acts{"tanh", "sin", "relu"};
  std::vector<std::string> sw_shapes{"4x64", "4x128", "6x128", "6x256", "8x256"};
  std::vector<int> sw_epochs{2048, 4096, 5120, 10240};
  std::vector<int> sw_colloc{1024, 2048};
  std::vector<std::uint64_t> sw_seeds{0};
  int sw_par = 1;
  sc_sweep->add_option("--activations", sw_acts)->delimiter(',')->capture_default_str();
  sc_sweep->add_option("--shapes", sw_shapes, "DxW list")->delimiter(',')->capture_default_str();
  sc_sweep->add_option("--epochs-list", sw_epochs)->delimiter(',')->capture_default_str();
  sc_sweep->add_option("--colloc-list", sw_colloc)->delimiter(',')->capture_default_str();
  sc_sweep->add_option("--seeds", sw_seeds)->delimiter(',')->capture_default_str();
  sc_sweep->add_option("--parallelism", sw_par, "concurrent cells (timings only comparable at 1)")
      ->capture_default_str();

  // --- report ---
  auto* sc_report = app.add_subcommand("report", "regenerate the sweep report from a store");
  std::string report_store;
  sc_report->add_option("--store", report_store, "sweep store directory")->required();

  for (CLI::App* sc : {sc_ref, sc_train, sc_eval, sc_prof, sc_sweep, sc_report}) {
    sc->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return 0;  // --help / --version
    return fail("usage", e.what(), 2);
  }

  try {
    std::filesystem::create_directories(out_dir);

    if (*sc_ref) {
      const kpinn::ProblemSpec spec = ref_p.spec();
      kpinn::FvGrid grid{ref_m, ref_levels};
      grid.validate();
      const kpinn::RefSolution ref = kpinn::fv_solve(spec, grid, ref_cfl);
      const std::string stem = out_dir + "/ref_" + kpinn::ic_name(spec.ic);
      kpinn::save_ref_binary(stem + ".bin", ref);
      kpinn::save_ref_csv(stem + ".csv", ref);
      std::cout << json{{"ref", stem + ".bin"},
                        {"mass_t0", ref.mass(0)},
                        {"mass_T", ref.mass(grid.n_t - 1)},
                        {"min_value", ref.min_value},
                        {"negative_overshoot", ref.negative_overshoot}}
                       .dump()
                << "\n";
      return 0;
    }

    if (*sc_train) {
      kpinn::NetConfig net{depth, width, kpinn::parse_activation(activation), seed};
      net.validate();
      tc.seed = seed;
      tc.checkpoint_epochs = checkpoint_at;
      tc.validate();
      const kpinn::ProblemSpec spec = train_p.spec();

      const kpinn::TrainReport rep = kpinn::train(net, spec, tc);

      kpinn::write_history_csv(out_dir + "/history.csv", rep.history);
      kpinn::save_checkpoint(out_dir + "/model.bin", net, rep.params);
      for (const auto& [ep, ps] : rep.checkpoints) {
        kpinn::save_checkpoint(out_dir + "/ckpt_" + std::to_string(ep) + ".bin", net, ps);
      }
      json run{{"activation", kpinn::activation_name(net.activation)},
               {"depth", net.depth},
               {"width", net.width},
               {"epochs", tc.epochs},
               {"n_r", tc.n_r},
               {"n_0", tc.n_0},
               {"n_q", tc.n_q},
               {"lr", tc.lr},
               {"lam_res", tc.lam_res},
               {"lam_ic", tc.lam_ic},
               {"seed", seed},
               {"resample", tc.resample},
               {"ic", kpinn::ic_name(spec.ic)},
               {"K", spec.K},
               {"T", spec.T},
               {"eps", spec.eps},
               {"init_scheme", kpinn::init_scheme_name(net.activation)},
               {"param_count", rep.params.values.size()},
               {"epochs_completed", rep.epochs_completed},
               {"wall_seconds", rep.wall_seconds},
               {"status", rep.status == kpinn::TrainStatus::kOk ? "ok" : "nonfinite"},
               {"failed_epoch", rep.failed_epoch}};
      if (!rep.history.empty()) {
        run["final_l_res"] = rep.history.back().l_res;
        run["final_l_ic"] = rep.history.back().l_ic;
        run["final_l_total"] = rep.history.back().l_total;
      }
      {
        std::ofstream f(out_dir + "/run.json");
        f << run.dump(2) << "\n";
      }
      std::cout << run.dump() << "\n";
      if (rep.status != kpinn::TrainStatus::kOk) {
        return fail("nonfinite",
                    "training hit a non-finite loss at epoch " +
                        std::to_string(rep.failed_epoch),
                    3);
      }
      return 0;
    }

    if (*sc_eval) {
      const auto [net, params] = kpinn::load_checkpoint(eval_model);
      const kpinn::RefSolution ref = kpinn::load_ref_binary(eval_ref);
      kpinn::ErrorReport rep;
      if (sc_eval->count("--K") || sc_eval->count("--T") || sc_eval->count("--ic") ||
          sc_eval->count("--eps")) {
        rep = kpinn::energy_norm(params, net, ref, eval_p.spec());
      } else {
        rep = kpinn::energy_norm(params, net, ref);
      }
      kpinn::write_error_report_csv(out_dir + "/error_report.csv", rep, ref);
      std::cout << report_to_json(rep).dump() << "\n";
      return 0;
    }

    if (*sc_prof) {
      const auto [net, params] = kpinn::load_checkpoint(prof_model);
      const kpinn::ProfileTable table = kpinn::profile(params, net, prof_t, prof_points);
      kpinn::write_profile_csv(out_dir + "/profile.csv", table);
      std::cout << json{{"profile", out_dir + "/profile.csv"},
                        {"rows", table.thetas.size()},
                        {"times", table.times.size()}}
                       .dump()
                << "\n";
      return 0;
    }

    if (*sc_sweep) {
      kpinn::SweepGrid grid;
      grid.activations.clear();
      for (const auto& a : sw_acts) grid.activations.push_back(kpinn::parse_activation(a));
      grid.shapes.clear();
      for (const auto& s : sw_shapes) grid.shapes.push_back(parse_shape(s));
      grid.epoch_budgets = sw_epochs;
      grid.colloc_counts = sw_colloc;
      grid.base_seeds = sw_seeds;
      const kpinn::ProblemSpec spec = sweep_p.spec();
      kpinn::RecordStore store(out_dir);
      kpinn::run_sweep(grid, spec, store, sw_par);
      std::cout << kpinn::write_report(store.records(), out_dir + "/report");
      return 0;
    }

    if (*sc_report) {
      kpinn::RecordStore store(report_store);
      std::cout << kpinn::write_report(store.records(), report_store + "/report");
      return 0;
    }

    return fail("usage", "no subcommand", 2);
  } catch (const kpinn::NonFiniteError& e) {
    return fail("nonfinite", e.what(), 3);
  } catch (const std::invalid_argument& e) {
    return fail("config", e.what(), 2);
  } catch (const std::domain_error& e) {
    return fail("config", e.what(), 2);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what(), 4);
  } catch (const std::runtime_error& e) {
    return fail("io", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 5);
  }
}
