// Command-line front end: gen | train | eval | loo | sweep. Every run is
// fully determined by (command, flags, seed); repeated runs write
// byte-identical files. Exit codes: 0 success, 1 usage error, 2 data or
// model I/O error, 3 training non-convergence.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmuevent/ae_softmax.hpp"
#include "pmuevent/dataset_io.hpp"
#include "pmuevent/eval.hpp"
#include "pmuevent/svm.hpp"
#include "pmuevent/synth.hpp"

namespace pmuevent {

namespace cli_detail {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitUnconverged = 3;

// "1..5" (inclusive range) or "1,2,3".
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = std::stoull(text.substr(0, dots));
    const std::uint64_t hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("seed range is reversed: " + text);
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::size_t at = 0;
  while (at <= text.size()) {
    const auto comma = text.find(',', at);
    const std::string tok =
        text.substr(at, comma == std::string::npos ? std::string::npos : comma - at);
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    at = comma + 1;
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

inline std::vector<Method> parse_methods(const std::string& text) {
  if (text == "both") return {Method::PcaSvm, Method::AeSoftmax};
  return {method_from_name(text)};
}

inline std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (at <= text.size()) {
    const auto comma = text.find(',', at);
    const std::string tok =
        text.substr(at, comma == std::string::npos ? std::string::npos : comma - at);
    if (!tok.empty()) out.push_back(tok);
    if (comma == std::string::npos) break;
    at = comma + 1;
  }
  return out;
}

struct GeneratorFlags {
  std::optional<double> thevenin_source, thevenin_impedance_mag, thevenin_impedance_ang_deg;
  std::optional<double> base_load_current, cap_step_v, cap_transition_s, tap_step_v;
  std::optional<double> oltc_transition_min_s, oltc_transition_max_s;
  std::optional<double> oltc_dwell_min_s, oltc_dwell_max_s, noise_std_fraction;
  std::string config_path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "flat key=value file mirroring generator config field names");
    cmd->add_option("--thevenin-source", thevenin_source);
    cmd->add_option("--thevenin-impedance-mag", thevenin_impedance_mag);
    cmd->add_option("--thevenin-impedance-ang", thevenin_impedance_ang_deg);
    cmd->add_option("--base-load-current", base_load_current);
    cmd->add_option("--cap-step-v", cap_step_v);
    cmd->add_option("--cap-transition-s", cap_transition_s);
    cmd->add_option("--tap-step-v", tap_step_v);
    cmd->add_option("--oltc-transition-min-s", oltc_transition_min_s);
    cmd->add_option("--oltc-transition-max-s", oltc_transition_max_s);
    cmd->add_option("--oltc-dwell-min-s", oltc_dwell_min_s);
    cmd->add_option("--oltc-dwell-max-s", oltc_dwell_max_s);
    cmd->add_option("--noise-std-fraction", noise_std_fraction);
  }

  // defaults < config file < explicit flags
  GeneratorConfig build(int sps, std::uint64_t seed) const {
    GeneratorConfig cfg;
    if (!config_path.empty()) cfg = load_generator_config(config_path, cfg);
    cfg.sps = sps;
    cfg.master_seed = seed;
    const auto apply = [](const std::optional<double>& v, double& field) {
      if (v) field = *v;
    };
    apply(thevenin_source, cfg.thevenin_source);
    apply(thevenin_impedance_mag, cfg.thevenin_impedance_mag);
    apply(thevenin_impedance_ang_deg, cfg.thevenin_impedance_ang_deg);
    apply(base_load_current, cfg.base_load_current);
    apply(cap_step_v, cfg.cap_step_v);
    apply(cap_transition_s, cfg.cap_transition_s);
    apply(tap_step_v, cfg.tap_step_v);
    apply(oltc_transition_min_s, cfg.oltc_transition_min_s);
    apply(oltc_transition_max_s, cfg.oltc_transition_max_s);
    apply(oltc_dwell_min_s, cfg.oltc_dwell_min_s);
    apply(oltc_dwell_max_s, cfg.oltc_dwell_max_s);
    apply(noise_std_fraction, cfg.noise_std_fraction);
    validate_config(cfg);
    return cfg;
  }
};

struct HyperFlags {
  HyperConfig hyper;
  bool grid = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--svm-c", hyper.svm.c, "SVM box constraint")->check(CLI::PositiveNumber);
    cmd->add_option("--svm-sigma", hyper.svm.sigma, "Gaussian kernel width")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--svm-tol", hyper.svm.tol)->check(CLI::PositiveNumber);
    cmd->add_option("--svm-max-passes", hyper.svm.max_passes)->check(CLI::PositiveNumber);
    cmd->add_option("--pca-k", hyper.pca_k, "eigenvalues kept")->check(CLI::Range(1, 6));
    cmd->add_option("--hidden", hyper.hidden, "autoencoder hidden width")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--lr", hyper.ae.learning_rate)->check(CLI::PositiveNumber);
    cmd->add_option("--epochs-ae", hyper.ae.epochs_ae)->check(CLI::NonNegativeNumber);
    cmd->add_option("--epochs-softmax", hyper.ae.epochs_softmax)
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--batch-size", hyper.ae.batch_size)->check(CLI::PositiveNumber);
    cmd->add_option("--l2", hyper.ae.l2)->check(CLI::NonNegativeNumber);
    cmd->add_option("--fine-tune-epochs", hyper.ae.fine_tune_epochs)
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--grid", grid, "3-fold cross-validated SVM grid search");
  }
};

inline const auto kOpenUnitInterval = CLI::Validator(
    [](std::string& s) -> std::string {
      try {
        const double v = std::stod(s);
        if (v > 0.0 && v < 1.0) return {};
      } catch (...) {
      }
      return "value must lie strictly between 0 and 1";
    },
    "FLOAT in (0,1)", "open unit interval");

}  // namespace cli_detail

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli_detail;
  namespace fs = std::filesystem;

  CLI::App app{"Synthetic PMU disruptive-event windows and their classification "
               "(PCA + one-vs-rest Gaussian SVM, autoencoder + softmax)"};
  app.require_subcommand(1);

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "generate a labeled 450-record dataset file");
  int gen_sps = 60;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::string dump_features_dir;
  gen->add_option("--sps", gen_sps, "reporting rate")
      ->check(CLI::IsMember({60, 120}))
      ->required();
  gen->add_option("--seed", gen_seed, "master seed")->required();
  gen->add_option("--out", gen_out, "output dataset path")->required();
  gen->add_option("--dump-features", dump_features_dir,
                  "also write one feature-matrix CSV per record into this directory");
  GeneratorFlags gen_flags;
  gen_flags.attach(gen);

  // --- train ---
  auto* train = app.add_subcommand("train", "train on a stratified split and evaluate");
  std::string train_method, train_data, model_out, confusion_out;
  double train_fraction = 0.5;
  std::uint64_t train_seed = 0;
  train->add_option("--method", train_method)
      ->check(CLI::IsMember({"pca-svm", "ae-softmax"}))
      ->required();
  train->add_option("--data", train_data, "dataset file")->required();
  train->add_option("--fraction", train_fraction, "training fraction")
      ->check(kOpenUnitInterval)
      ->required();
  train->add_option("--seed", train_seed)->required();
  train->add_option("--model-out", model_out)->required();
  train->add_option("--confusion-out", confusion_out,
                    "confusion JSON path (default: <model-out>.confusion.json)");
  HyperFlags train_hyper;
  train_hyper.attach(train);

  // --- eval ---
  auto* eval = app.add_subcommand("eval", "evaluate a saved model over a dataset file");
  std::string eval_model, eval_data, eval_out;
  eval->add_option("--model", eval_model)->required();
  eval->add_option("--data", eval_data)->required();
  eval->add_option("--out", eval_out, "confusion JSON path");

  // --- loo ---
  auto* loo = app.add_subcommand("loo", "leave-one-out accuracy");
  std::string loo_method, loo_data, loo_out;
  std::uint64_t loo_seed = 0;
  std::uint64_t loo_gen_seed = 1;
  int loo_sps = 60;
  std::size_t loo_per_class = 0;
  unsigned loo_threads = 0;
  loo->add_option("--method", loo_method)
      ->check(CLI::IsMember({"pca-svm", "ae-softmax"}))
      ->required();
  loo->add_option("--data", loo_data, "dataset file (generated on the fly if omitted)");
  loo->add_option("--sps", loo_sps)->check(CLI::IsMember({60, 120}));
  loo->add_option("--gen-seed", loo_gen_seed, "master seed when generating");
  loo->add_option("--seed", loo_seed, "fold seed")->required();
  loo->add_option("--per-class", loo_per_class,
                  "subsample this many records per class first (0 = all)");
  loo->add_option("--threads", loo_threads);
  loo->add_option("--out", loo_out, "write the accuracy line to this file");
  HyperFlags loo_hyper;
  loo_hyper.attach(loo);

  // --- sweep ---
  auto* sweep = app.add_subcommand("sweep", "training-fraction x sampling-rate sweep CSV");
  std::string sweep_methods = "both", sweep_out;
  std::string sweep_sps = "60,120", sweep_seeds = "1..5", sweep_fractions;
  std::uint64_t sweep_gen_seed = 1;
  unsigned sweep_threads = 0;
  sweep->add_option("--methods", sweep_methods)
      ->check(CLI::IsMember({"both", "pca-svm", "ae-softmax"}));
  sweep->add_option("--sps", sweep_sps, "comma list of rates");
  sweep->add_option("--seeds", sweep_seeds, "comma list or lo..hi range");
  sweep->add_option("--fractions", sweep_fractions,
                    "comma list (default 0.2,0.3,...,0.9)");
  sweep->add_option("--gen-seed", sweep_gen_seed, "dataset master seed");
  sweep->add_option("--out", sweep_out, "results CSV path")->required();
  sweep->add_option("--threads", sweep_threads);
  HyperFlags sweep_hyper;
  sweep_hyper.attach(sweep);

  try {
    std::vector<const char*> argv;
    argv.push_back("pmuevent");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const GeneratorConfig cfg = gen_flags.build(gen_sps, gen_seed);
      const Dataset ds = build_dataset(cfg);
      write_dataset(ds, gen_out);
      for (const auto& [cls, count] : class_counts(ds))
        out << "class " << class_code(cls) << ": " << count << " records\n";
      out << "wrote " << ds.records.size() << " records to " << gen_out << "\n";
      if (!dump_features_dir.empty()) {
        fs::create_directories(dump_features_dir);
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
          char name[32];
          std::snprintf(name, sizeof(name), "record_%04zu.csv", i);
          write_feature_csv(build_feature_matrix(ds.records[i]),
                            fs::path(dump_features_dir) / name);
        }
        out << "wrote feature CSVs to " << dump_features_dir << "\n";
      }
      return kExitOk;
    }

    if (train->parsed()) {
      const Dataset ds = read_dataset(train_data);
      const Method method = method_from_name(train_method);
      const Split split =
          stratified_split(ds, train_fraction, mix_seed(train_seed, 0x51ull));
      HyperConfig hyper = train_hyper.hyper;
      if (train_hyper.grid && method == Method::PcaSvm) {
        std::vector<std::vector<double>> xs;
        std::vector<EventClass> ys;
        for (std::size_t i : split.train_idx) {
          xs.push_back(pca_svm_features(ds.records[i], hyper.pca_k));
          ys.push_back(ds.records[i].label);
        }
        hyper.svm = grid_search_svm(xs, ys, mix_seed(train_seed, 0x9cull), hyper.svm);
        out << "grid search selected c=" << hyper.svm.c << " sigma=" << hyper.svm.sigma
            << "\n";
      }
      const TrainEvalResult r =
          train_and_eval(ds, split, method, hyper, mix_seed(train_seed, 0x7eull));
      if (const auto* svm = std::get_if<MultiSvmModel>(&r.model))
        save_multi_svm(*svm, model_out);
      else
        save_ae_softmax(std::get<AeSoftmaxModel>(r.model), model_out);
      const std::string cm_path =
          confusion_out.empty() ? model_out + ".confusion.json" : confusion_out;
      write_confusion(r.cm, cm_path);
      std::int64_t diag = 0;
      for (int c = 0; c < 3; ++c) diag += r.cm.counts[c][c];
      char line[128];
      std::snprintf(line, sizeof(line), "accuracy %.6f (%lld/%lld)\n", accuracy(r.cm),
                    static_cast<long long>(diag), static_cast<long long>(r.cm.total));
      out << line;
      if (!model_converged(r.model)) {
        err << "warning: SMO hit the sweep limit before satisfying KKT\n";
        return kExitUnconverged;
      }
      return kExitOk;
    }

    if (eval->parsed()) {
      const Dataset ds = read_dataset(eval_data);
      std::ifstream in(eval_model, std::ios::binary);
      if (!in) throw IoError("cannot open model: " + eval_model);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad model file: ") + e.what());
      }
      TrainedModel model;
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "pca-svm")
        model = multi_svm_from_json(j);
      else if (kind == "ae-softmax")
        model = ae_softmax_from_json(j);
      else
        throw IoError("unknown model kind: " + kind);
      ConfusionMatrix cm;
      for (const auto& rec : ds.records) confusion_add(cm, rec.label, predict(model, rec));
      if (!eval_out.empty()) write_confusion(cm, eval_out);
      char line[64];
      std::snprintf(line, sizeof(line), "accuracy %.6f\n", accuracy(cm));
      out << line;
      return kExitOk;
    }

    if (loo->parsed()) {
      Dataset ds;
      if (!loo_data.empty()) {
        ds = read_dataset(loo_data);
      } else {
        GeneratorConfig cfg;
        cfg.sps = loo_sps;
        cfg.master_seed = loo_gen_seed;
        ds = build_dataset(cfg);
      }
      if (loo_per_class > 0)
        ds = subsample_per_class(ds, loo_per_class, mix_seed(loo_seed, 0x5bull));
      const double acc = leave_one_out(ds, method_from_name(loo_method), loo_hyper.hyper,
                                       loo_seed, loo_threads);
      char line[160];
      std::snprintf(line, sizeof(line), "loo accuracy %.6f over %zu folds (%s)\n", acc,
                    ds.records.size(), loo_method.c_str());
      out << line;
      if (!loo_out.empty()) atomic_write_file(loo_out, line);
      return kExitOk;
    }

    if (sweep->parsed()) {
      std::vector<double> fractions;
      if (sweep_fractions.empty()) {
        for (int i = 2; i <= 9; ++i) fractions.push_back(i / 10.0);
      } else {
        for (const auto& tok : split_commas(sweep_fractions))
          fractions.push_back(std::stod(tok));
      }
      std::vector<int> sps_list;
      for (const auto& tok : split_commas(sweep_sps)) sps_list.push_back(std::stoi(tok));
      for (int s : sps_list)
        if (s != 60 && s != 120) throw std::invalid_argument("sps must be 60 or 120");
      GeneratorConfig base;
      base.master_seed = sweep_gen_seed;
      const std::vector<SweepRow> rows =
          run_sweep(fractions, sps_list, parse_methods(sweep_methods),
                    parse_seed_list(sweep_seeds), base, sweep_hyper.hyper, sweep_threads);
      write_sweep_csv(rows, sweep_out);
      out << "wrote " << rows.size() << " rows to " << sweep_out << "\n";
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace pmuevent
