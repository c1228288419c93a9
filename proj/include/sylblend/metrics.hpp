#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "sylblend/signal.hpp"

namespace sylblend {

/// Tolerances and costs for the seven measures, in z-normalized units.
struct MetricParams {
  double minkowski_p = 2.0;
  double edr_epsilon = 0.25;
  double lcss_epsilon = 0.25;
  double erp_gap = 0.0;
  double msm_cost = 1.0;
  std::optional<std::size_t> dtw_band;  // Sakoe-Chiba half-width

  void validate() const;
};

inline constexpr std::size_t kFeatureCount = 7;

/// Column order shared by FeatureRow, the dataset CSV, and feature matrices.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "dtw", "corr", "minkowski", "edr", "erp", "lcss", "msm"};

struct FeatureRow {
  double dtw = 0.0;
  double corr = 0.0;
  double minkowski = 0.0;
  double edr = 0.0;   // normalized by max length
  double erp = 0.0;
  double lcss = 0.0;  // normalized by min length
  double msm = 0.0;
  int label = 0;

  std::array<double, kFeatureCount> features() const {
    return {dtw, corr, minkowski, edr, erp, lcss, msm};
  }
  static FeatureRow from_features(std::span<const double> f, int label);

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

namespace metrics {

double dtw_distance(std::span<const double> a, std::span<const double> b,
                    std::optional<std::size_t> band = std::nullopt);
double minkowski_distance(std::span<const double> a, std::span<const double> b, double p);
double correlation(std::span<const double> a, std::span<const double> b);
std::size_t edr(std::span<const double> a, std::span<const double> b, double epsilon);
double erp(std::span<const double> a, std::span<const double> b, double gap);
std::size_t lcss_length(std::span<const double> a, std::span<const double> b, double epsilon);
double msm(std::span<const double> a, std::span<const double> b, double cost);

/// All seven measures for one (control, assessed) pair; label left at 0.
/// Minkowski and correlation use the DTW-aligned pair, the elastic
/// measures use the raw sequences.
FeatureRow feature_vector(const Sequence& control, const Sequence& assessed,
                          const MetricParams& params = {});

}  // namespace metrics
}  // namespace sylblend
