#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sylblend/blend.hpp"
#include "sylblend/dataprep.hpp"
#include "sylblend/learners.hpp"

namespace sylblend {

inline constexpr std::string_view kDatasetHeader = "dtw,corr,minkowski,edr,erp,lcss,msm,label";
inline constexpr std::string_view kReportHeader = "variant,meta,bases,accuracy,n_train,n_test,seed";

struct SplitSpec {
  double test_fraction = 0.25;
  bool stratified = true;
  std::uint64_t seed = 0;
};

struct SynthParams {
  std::size_t rows = 1020;
  double minority_fraction = 0.3;
  double separation = 2.0;
  std::uint64_t seed = 0;
  /// Half the rows get 3x noise on the distance-type features, the other
  /// half on the similarity-type features; msm then encodes the region.
  bool region_noise = false;
};

struct SweepOptions {
  std::vector<ClassifierKind> pool{kDefaultPool.begin(), kDefaultPool.end()};
  std::vector<std::size_t> subset_sizes{2, 3, 4};
  double test_fraction = 0.25;
  SmoteParams smote{};
  double fence_k = 1.5;
  double val_fraction = 0.3;
  MetaFeatureMode meta_feature_mode = MetaFeatureMode::labels;
  bool standardize = true;  // z-score columns with outer-train statistics
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

struct BaselineRow {
  Variant variant = Variant::original;
  ClassifierKind kind = ClassifierKind::knn;
  double accuracy = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

struct EnsembleRow {
  Variant variant = Variant::original;
  ClassifierKind meta = ClassifierKind::knn;
  std::vector<ClassifierKind> bases;
  double accuracy = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

struct SweepReport {
  std::vector<BaselineRow> baselines;
  std::vector<EnsembleRow> ensembles;
  SweepOptions options;
  std::size_t dataset_rows = 0;
};

struct VariantSummary {
  Variant variant = Variant::original;
  std::optional<BaselineRow> best_baseline;
  std::optional<EnsembleRow> best_ensemble;
  /// best ensemble minus best baseline, when both exist
  std::optional<double> improvement;
};

/// Outer split plus the four training variants built from the train part.
struct SweepData {
  Dataset train;
  Dataset test;
  dataprep::DatasetVariants variants;
};

namespace harness {

Dataset load_dataset_csv(const std::filesystem::path& path);
Dataset parse_dataset_csv(const std::string& text);
std::string dataset_to_csv(const Dataset& d);
void save_dataset_csv(const Dataset& d, const std::filesystem::path& path);

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& s);

double accuracy(const Labels& predicted, const Labels& truth);

Dataset synth_dataset(const SynthParams& p);

/// All base subsets of `pool` with the requested sizes, each in pool order;
/// sizes ascending, subsets in lexicographic index order.
std::vector<std::vector<ClassifierKind>> base_subsets(const std::vector<ClassifierKind>& pool,
                                                      const std::vector<std::size_t>& sizes);

SweepData prepare_sweep_data(const Dataset& d, const SweepOptions& options);

SweepReport sweep(const Dataset& d, const SweepOptions& options);

std::vector<VariantSummary> best_of(const SweepReport& report);

std::string report_csv(const SweepReport& report);
std::string report_markdown(const SweepReport& report);

/// Formats an accuracy with three decimals.
std::string format_accuracy(double accuracy);
std::string join_kinds(const std::vector<ClassifierKind>& kinds, char sep = '+');

}  // namespace harness
}  // namespace sylblend
