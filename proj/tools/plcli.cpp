// plcli: run the benchmark experiments, sweep/train/evaluate patch-learning
// models on CSV datasets, and export tidy plot data.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "patchlearn/dataset_io.hpp"
#include "patchlearn/experiments.hpp"
#include "patchlearn/metrics.hpp"
#include "patchlearn/patch_learning.hpp"
#include "patchlearn/report.hpp"
#include "patchlearn/serialization.hpp"

namespace {

using namespace patchlearn;

void write_output(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open for writing: " + out);
  file << text;
  if (!file) throw std::runtime_error("write failed: " + out);
}

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw std::runtime_error("unknown format '" + name + "' (expected csv or json)");
}

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

int run_experiment_cmd(const ExperimentConfig& cfg, const std::string& format,
                       const std::string& out) {
  Report rep = run_experiment(cfg);
  write_output(out, render_report(rep, parse_format(format)));
  return 0;
}

int run_sweep_cmd(const std::string& dataPath, int lMax, double alpha, int mfs,
                  const std::string& format, const std::string& out) {
  Dataset data = load_dataset_csv(dataPath);
  PlConfig cfg;
  cfg.maxPatches = lMax;
  cfg.alpha = alpha;
  LearnerFactory anfis = detail::anfis_factory(mfs);
  PlSweepResult sweep = select_num_patches(data, cfg, anfis, anfis);

  Report rep;
  rep.experiment = 0;  // ad-hoc dataset, not one of the built-in benchmarks
  rep.alpha = alpha;
  rep.bestL = sweep.bestL;
  rep.config["dataset"] = dataPath;
  rep.config["global"] = "anfis";
  rep.config["patch"] = "anfis";
  rep.config["mfs"] = std::to_string(mfs);
  rep.config["lMax"] = std::to_string(lMax);
  for (const PlSweepEntry& entry : sweep.entries)
    rep.rows.push_back(
        make_pl_row("pl-anfis", entry.requestedPatches, entry.model, data, nullptr, 0.0));
  validate_report(rep);
  write_output(out, render_report(rep, parse_format(format)));
  return 0;
}

int run_train_cmd(const std::string& dataPath, int patches, int lMax, double alpha, int mfs,
                  const std::string& out) {
  Dataset data = load_dataset_csv(dataPath);
  PlConfig cfg;
  cfg.alpha = alpha;
  LearnerFactory anfis = detail::anfis_factory(mfs);

  PlModel model;
  if (patches < 0) {
    cfg.maxPatches = lMax;
    PlSweepResult sweep = select_num_patches(data, cfg, anfis, anfis);
    model = std::move(sweep.entries[sweep.bestL].model);
    std::cerr << "selected L=" << sweep.bestL << " by loss over 0.." << lMax << "\n";
  } else {
    cfg.maxPatches = patches;
    model = train_patch_learning(data, cfg, anfis, anfis);
  }
  save_model_file(out, patch_model_to_json(model));
  std::cout << "wrote " << out << ": patches=" << model.patches.size()
            << " rmse=" << fmt(model.trainingRmse, "%.6g") << " loss=" << fmt(model.loss, "%.6g")
            << "\n";
  return 0;
}

int run_predict_cmd(const std::string& modelPath, const std::string& dataPath,
                    const std::string& out) {
  AnyModel model = any_model_from_json(load_model_file(modelPath), "$.model");
  Dataset data = load_dataset_csv(dataPath);

  std::string text;
  for (std::size_t m = 0; m < data.dims(); ++m) text += "x" + std::to_string(m + 1) + ",";
  text += "y,predicted\n";
  std::vector<double> predictions(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) {
    predictions[n] = model.predict(data.row(n));
    for (double v : data.inputs[n]) text += fmt(v, "%.12g") + ",";
    text += fmt(data.targets[n], "%.12g") + "," + fmt(predictions[n]) + "\n";
  }
  Metrics scores = compute_metrics(predictions, data.targets);
  std::cerr << "kind=" << model.kind << " rmse=" << fmt(scores.rmse, "%.6g")
            << " ape=" << fmt(scores.ape, "%.6g") << "\n";
  write_output(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patch-learning regression harness"};
  app.require_subcommand(1);

  ExperimentConfig expCfg;
  std::string format = "csv";
  std::string out;
  std::string dataPath, modelPath;
  int lMax = 5;
  int patches = -1;
  double alpha = 0.25;
  int mfs = 2;
  int plotL = -1;

  CLI::App* experiment = app.add_subcommand("experiment", "run one benchmark experiment (1-5)");
  experiment->add_option("id", expCfg.id, "experiment id")->required()->check(CLI::Range(1, 5));
  experiment->add_option("--l-max", expCfg.lMax, "patch-count sweep bound (default per experiment)");
  experiment->add_option("--alpha", expCfg.alpha, "loss exponent")->capture_default_str();
  experiment->add_option("--mfs", expCfg.mfsPerInput, "trapezoid MFs per input")->capture_default_str();
  experiment->add_option("--seed", expCfg.seed, "bagging resample seed")->capture_default_str();
  experiment->add_option("--retrain-every", expCfg.retrainEvery,
                         "experiment 4: online retrain cadence")->capture_default_str();
  experiment->add_option("--format", format, "csv or json")->capture_default_str();
  experiment->add_option("--out", out, "write the report here instead of stdout");

  CLI::App* sweep = app.add_subcommand("sweep", "patch-count sweep on a dataset CSV");
  sweep->add_option("--l-max", lMax, "largest patch count to try")->required();
  sweep->add_option("--data", dataPath, "dataset CSV (header x1,...,xM,y)")->required();
  sweep->add_option("--alpha", alpha, "loss exponent")->capture_default_str();
  sweep->add_option("--mfs", mfs, "trapezoid MFs per input")->capture_default_str();
  sweep->add_option("--format", format, "csv or json")->capture_default_str();
  sweep->add_option("--out", out, "write the report here instead of stdout");

  CLI::App* train = app.add_subcommand("train", "train a patch-learning model on a dataset CSV");
  train->add_option("--data", dataPath, "dataset CSV (header x1,...,xM,y)")->required();
  train->add_option("--patches", patches, "patch count (omit to pick by loss up to --l-max)");
  train->add_option("--l-max", lMax, "sweep bound when --patches is omitted")->capture_default_str();
  train->add_option("--alpha", alpha, "loss exponent")->capture_default_str();
  train->add_option("--mfs", mfs, "trapezoid MFs per input")->capture_default_str();
  train->add_option("--out", out, "model file path")->required();

  CLI::App* predict = app.add_subcommand("predict", "evaluate a saved model on a dataset CSV");
  predict->add_option("--model", modelPath, "model file from train")->required();
  predict->add_option("--data", dataPath, "dataset CSV (header x1,...,xM,y)")->required();
  predict->add_option("--out", out, "write predictions here instead of stdout");

  CLI::App* plot = app.add_subcommand("export-plot", "tidy series,x,y plot data for an experiment");
  plot->add_option("id", expCfg.id, "experiment id")->required()->check(CLI::Range(1, 5));
  plot->add_option("--l", plotL, "patch count to plot (default: loss-minimal)");
  plot->add_option("--l-max", expCfg.lMax, "patch-count sweep bound (default per experiment)");
  plot->add_option("--alpha", expCfg.alpha, "loss exponent")->capture_default_str();
  plot->add_option("--mfs", expCfg.mfsPerInput, "trapezoid MFs per input")->capture_default_str();
  plot->add_option("--out", out, "write plot CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (experiment->parsed()) return run_experiment_cmd(expCfg, format, out);
    if (sweep->parsed()) return run_sweep_cmd(dataPath, lMax, alpha, mfs, format, out);
    if (train->parsed()) return run_train_cmd(dataPath, patches, lMax, alpha, mfs, out);
    if (predict->parsed()) return run_predict_cmd(modelPath, dataPath, out);
    if (plot->parsed()) {
      write_output(out, experiment_plot_csv(expCfg, plotL));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "plcli: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
