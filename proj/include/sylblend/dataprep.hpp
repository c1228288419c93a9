#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sylblend/matrix.hpp"
#include "sylblend/metrics.hpp"

namespace sylblend {

enum class Variant { original, cleaned, rebalanced, cleaned_rebalanced };

inline constexpr std::array<Variant, 4> kAllVariants = {
    Variant::original, Variant::cleaned, Variant::rebalanced, Variant::cleaned_rebalanced};

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);

struct Dataset {
  std::vector<FeatureRow> rows;
  Variant variant = Variant::original;
  std::string phoneme_tag;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  std::size_t count(int label) const;

  FeatureMatrix features() const;
  Labels labels() const;
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Throws NonFiniteFeature / LabelError on rows breaking the invariants.
  void validate() const;
};

struct SmoteParams {
  std::size_t n_clusters = 8;
  double cluster_balance_threshold = 0.5;
  std::size_t k_neighbors = 5;
  double density_exponent = static_cast<double>(kFeatureCount);
  std::uint64_t seed = 0;

  void validate() const;
};

namespace dataprep {

/// Quantile of an ascending range by linear interpolation at (n-1)*q.
double quantile_sorted(std::span<const double> sorted, double q);

/// Tukey-fence cleaning. Fences per column are computed once over all rows;
/// a row is dropped if any feature falls strictly outside its fences.
Dataset iqr_clean(const Dataset& d, double fence_k = 1.5);

struct KMeansResult {
  std::vector<std::size_t> assignment;  // cluster index per point
  FeatureMatrix centroids;
  double cost = 0.0;                    // within-cluster sum of squares
  std::vector<double> cost_history;     // cost after each assignment pass
  std::size_t iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeding. k is capped at the number of
/// points. Converges when no centroid moves by 1e-4 or more, or after 100
/// iterations.
KMeansResult kmeans(const FeatureMatrix& points, std::size_t k, std::uint64_t seed);

/// Cluster-filtered, sparsity-weighted SMOTE up to exact class balance.
/// Original rows are kept in order; synthetic minority rows are appended.
Dataset kmeans_smote(const Dataset& d, const SmoteParams& params);

struct DatasetVariants {
  Dataset original;
  Dataset cleaned;
  Dataset rebalanced;
  Dataset cleaned_rebalanced;

  const Dataset& get(Variant v) const;
};

DatasetVariants make_variants(const Dataset& d, const SmoteParams& params, double fence_k = 1.5);

}  // namespace dataprep
}  // namespace sylblend
