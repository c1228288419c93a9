// Command-line front end: feature extraction, dataset preparation, blend
// training/evaluation, the configuration sweep and synthetic data.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sylblend/blend.hpp"
#include "sylblend/dataprep.hpp"
#include "sylblend/error.hpp"
#include "sylblend/harness.hpp"
#include "sylblend/learners.hpp"
#include "sylblend/metrics.hpp"
#include "sylblend/serialization.hpp"
#include "sylblend/signal.hpp"

namespace fs = std::filesystem;
using namespace sylblend;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<ClassifierKind> parse_kinds(const std::string& text) {
  std::vector<ClassifierKind> kinds;
  for (const auto& name : split_list(text)) kinds.push_back(kind_from_string(name));
  return kinds;
}

std::optional<fs::path> find_config_flag(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return fs::path(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return fs::path(arg.substr(9));
  }
  return std::nullopt;
}

std::string json_scalar_text(const io::Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string joined;
    for (const auto& item : v) joined += (joined.empty() ? "" : ",") + json_scalar_text(item);
    return joined;
  }
  return v.dump();
}

// Config values become option defaults, so explicit flags still win.
void apply_config(CLI::App& app, const io::Json& config) {
  for (auto* opt : app.get_options()) {
    const std::string& name = opt->get_lnames().empty() ? std::string() : opt->get_lnames().front();
    if (name.empty() || name == "config" || !config.contains(name)) continue;
    opt->default_val(json_scalar_text(config.at(name)));
    opt->required(false);
  }
  for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) apply_config(*sub, config);
}

// ---- subcommands ----------------------------------------------------------

struct MetricsArgs {
  std::string control, assessed, params, window, hop;
  bool no_z_normalize = false;
  int label = -1;
};

int run_metrics(const MetricsArgs& a) {
  MetricParams params;
  if (!a.params.empty()) params = io::metric_params_from_json(io::read_json_file(a.params));

  auto load = [&](const std::string& path) {
    Sequence s = signal::read_any(path);
    PreprocessParams pre;
    pre.z_normalize = !a.no_z_normalize;
    // Audio is reduced to an RMS envelope by default; CSV series are used
    // at their given resolution unless a window is requested.
    pre.envelope_window = s.sample_rate ? 256 : 0;
    pre.envelope_hop = 128;
    if (!a.window.empty()) pre.envelope_window = std::stoul(a.window);
    if (!a.hop.empty()) pre.envelope_hop = std::stoul(a.hop);
    if (pre.envelope_window != 0 && a.hop.empty()) pre.envelope_hop = std::max<std::size_t>(1, pre.envelope_window / 2);
    return signal::preprocess(s, pre);
  };
  const auto row = metrics::feature_vector(load(a.control), load(a.assessed), params);
  Dataset d;
  d.rows.push_back(row);
  std::string csv = harness::dataset_to_csv(d);
  if (a.label != 0 && a.label != 1) {
    // No label requested: drop the label column.
    std::string out;
    std::stringstream in(csv);
    std::string line;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    csv = out;
  } else {
    csv.replace(csv.size() - 2, 1, a.label == 1 ? "1" : "0");
  }
  std::cout << csv;
  return 0;
}

int run_clean(const std::string& in, const std::string& out, double fence_k) {
  const auto d = harness::load_dataset_csv(in);
  const auto cleaned = dataprep::iqr_clean(d, fence_k);
  harness::save_dataset_csv(cleaned, out);
  std::cerr << "kept " << cleaned.size() << " of " << d.size() << " rows\n";
  return 0;
}

int run_rebalance(const std::string& in, const std::string& out, const SmoteParams& params) {
  const auto d = harness::load_dataset_csv(in);
  const auto balanced = dataprep::kmeans_smote(d, params);
  harness::save_dataset_csv(balanced, out);
  std::cerr << "class 0: " << balanced.count(0) << ", class 1: " << balanced.count(1) << "\n";
  return 0;
}

int run_train(const std::string& in, const std::string& meta, const std::string& bases, std::uint64_t seed,
              const std::string& out, double val_fraction, const std::string& mode) {
  const auto d = harness::load_dataset_csv(in);
  const auto base_kinds = parse_kinds(bases);
  auto config = blend::make_config(kind_from_string(meta), base_kinds, seed);
  config.val_fraction = val_fraction;
  config.meta_feature_mode = meta_mode_from_string(mode);
  const auto ensemble = blend::fit_ensemble(config, d.features(), d.labels());
  io::write_text_file(out, io::to_json(ensemble).dump() + "\n");
  return 0;
}

int run_eval(const std::string& model_path, const std::string& in) {
  const auto j = io::read_json_file(model_path);
  const auto d = harness::load_dataset_csv(in);
  const auto x = d.features();
  Labels predicted;
  if (j.contains("base_models")) {
    predicted = blend::predict_ensemble(io::ensemble_from_json(j), x);
  } else {
    predicted = learners::predict(io::model_from_json(j), x);
  }
  std::cout << harness::format_accuracy(harness::accuracy(predicted, d.labels())) << "\n";
  return 0;
}

int run_sweep(const std::string& in, const std::string& report_path, SweepOptions options,
              const std::string& pool, const std::string& mode) {
  const auto d = harness::load_dataset_csv(in);
  if (!pool.empty()) options.pool = parse_kinds(pool);
  options.meta_feature_mode = meta_mode_from_string(mode);
  const auto report = harness::sweep(d, options);
  io::write_text_file(report_path, harness::report_csv(report));
  fs::path md = report_path;
  md.replace_extension(".md");
  io::write_text_file(md, harness::report_markdown(report));
  for (const auto& s : harness::best_of(report)) {
    std::cout << to_string(s.variant) << ": best single "
              << (s.best_baseline ? harness::format_accuracy(s.best_baseline->accuracy) : "-") << ", best blend "
              << (s.best_ensemble ? harness::format_accuracy(s.best_ensemble->accuracy) : "-") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Syllable intelligibility features, dataset preparation and blending ensembles"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file of option defaults (flags override it)");

  MetricsArgs metrics_args;
  auto* metrics_cmd = app.add_subcommand("metrics", "Print the seven measures for a control/assessed pair");
  metrics_cmd->add_option("--control", metrics_args.control, "Control recording (.wav or one-value-per-line CSV)")->required();
  metrics_cmd->add_option("--assessed", metrics_args.assessed, "Assessed recording")->required();
  metrics_cmd->add_option("--params", metrics_args.params, "JSON file with metric parameters");
  metrics_cmd->add_flag("--no-z-normalize", metrics_args.no_z_normalize, "Skip z-normalization");
  metrics_cmd->add_option("--envelope-window", metrics_args.window, "RMS window in samples (0 disables)");
  metrics_cmd->add_option("--envelope-hop", metrics_args.hop, "RMS hop in samples");
  metrics_cmd->add_option("--label", metrics_args.label, "Append a class label column (0 or 1)");

  auto* prep_cmd = app.add_subcommand("prep", "Dataset preparation");
  prep_cmd->require_subcommand(1);
  std::string clean_in, clean_out;
  double fence_k = 1.5;
  auto* clean_cmd = prep_cmd->add_subcommand("clean", "Quartile-fence outlier removal");
  clean_cmd->add_option("--in", clean_in)->required();
  clean_cmd->add_option("--out", clean_out)->required();
  clean_cmd->add_option("--fence-k", fence_k, "Fence multiplier")->capture_default_str();

  std::string rebalance_in, rebalance_out;
  SmoteParams smote;
  auto* rebalance_cmd = prep_cmd->add_subcommand("rebalance", "KMeansSMOTE oversampling to class balance");
  rebalance_cmd->add_option("--in", rebalance_in)->required();
  rebalance_cmd->add_option("--out", rebalance_out)->required();
  rebalance_cmd->add_option("--seed", smote.seed)->required();
  rebalance_cmd->add_option("--clusters", smote.n_clusters)->capture_default_str();
  rebalance_cmd->add_option("--balance-threshold", smote.cluster_balance_threshold)->capture_default_str();
  rebalance_cmd->add_option("--k-neighbors", smote.k_neighbors)->capture_default_str();
  rebalance_cmd->add_option("--density-exponent", smote.density_exponent)->capture_default_str();

  std::string train_in, train_meta, train_bases, train_out, train_mode = "labels";
  std::uint64_t train_seed = 0;
  double train_val_fraction = 0.3;
  auto* train_cmd = app.add_subcommand("train", "Fit a blending ensemble and write it as JSON");
  train_cmd->add_option("--in", train_in)->required();
  train_cmd->add_option("--meta", train_meta, "Main (meta) classifier kind")->required();
  train_cmd->add_option("--bases", train_bases, "Comma-separated base classifier kinds")->required();
  train_cmd->add_option("--seed", train_seed)->required();
  train_cmd->add_option("--out", train_out)->required();
  train_cmd->add_option("--val-fraction", train_val_fraction)->capture_default_str();
  train_cmd->add_option("--meta-features", train_mode, "labels or scores")->capture_default_str();

  std::string eval_model, eval_in;
  auto* eval_cmd = app.add_subcommand("eval", "Print the accuracy of a model or ensemble on a dataset");
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--in", eval_in)->required();

  std::string sweep_in, sweep_report, sweep_pool, sweep_mode = "labels";
  SweepOptions sweep_options;
  bool no_standardize = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate every meta/base combination on all dataset variants");
  sweep_cmd->add_option("--in", sweep_in)->required();
  sweep_cmd->add_option("--seed", sweep_options.seed)->required();
  sweep_cmd->add_option("--report", sweep_report, "Report CSV path; a .md table is written next to it")->required();
  sweep_cmd->add_option("--subset-sizes", sweep_options.subset_sizes)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--pool", sweep_pool, "Comma-separated classifier kinds (default: knn,random_forest,svm,logistic_regression,decision_tree)");
  sweep_cmd->add_option("--test-fraction", sweep_options.test_fraction)->capture_default_str();
  sweep_cmd->add_option("--val-fraction", sweep_options.val_fraction)->capture_default_str();
  sweep_cmd->add_option("--fence-k", sweep_options.fence_k)->capture_default_str();
  sweep_cmd->add_option("--meta-features", sweep_mode)->capture_default_str();
  sweep_cmd->add_option("--threads", sweep_options.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sweep_cmd->add_flag("--no-standardize", no_standardize, "Skip z-scoring of feature columns");

  SynthParams synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic two-class feature dataset");
  synth_cmd->add_option("--rows", synth.rows)->capture_default_str();
  synth_cmd->add_option("--minority", synth.minority_fraction)->capture_default_str();
  synth_cmd->add_option("--separation", synth.separation)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->required();
  synth_cmd->add_option("--out", synth_out)->required();
  synth_cmd->add_flag("--region-noise", synth.region_noise, "Region-dependent feature noise");

  try {
    if (const auto config_file = find_config_flag(argc, argv)) apply_config(app, io::read_json_file(*config_file));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const CLI::Error& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*metrics_cmd) return run_metrics(metrics_args);
    if (*clean_cmd) return run_clean(clean_in, clean_out, fence_k);
    if (*rebalance_cmd) return run_rebalance(rebalance_in, rebalance_out, smote);
    if (*train_cmd)
      return run_train(train_in, train_meta, train_bases, train_seed, train_out, train_val_fraction, train_mode);
    if (*eval_cmd) return run_eval(eval_model, eval_in);
    if (*sweep_cmd) {
      sweep_options.standardize = !no_standardize;
      return run_sweep(sweep_in, sweep_report, sweep_options, sweep_pool, sweep_mode);
    }
    if (*synth_cmd) {
      harness::save_dataset_csv(harness::synth_dataset(synth), synth_out);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::BadParam ? kUsageError : kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
