#include "sylblend/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sylblend/error.hpp"

namespace sylblend {

void MetricParams::validate() const {
  const bool finite = std::isfinite(minkowski_p) && std::isfinite(edr_epsilon) &&
                      std::isfinite(lcss_epsilon) && std::isfinite(erp_gap) &&
                      std::isfinite(msm_cost);
  if (!finite) throw Error(ErrorCode::BadParam, "metric parameters must be finite");
  if (minkowski_p < 1.0) throw Error(ErrorCode::BadParam, "minkowski p must be >= 1");
  if (edr_epsilon < 0.0 || lcss_epsilon < 0.0)
    throw Error(ErrorCode::BadParam, "epsilon must be >= 0");
  if (!(msm_cost > 0.0)) throw Error(ErrorCode::BadParam, "msm cost must be > 0");
}

FeatureRow FeatureRow::from_features(std::span<const double> f, int label) {
  if (f.size() != kFeatureCount)
    throw Error(ErrorCode::ShapeMismatch, "feature row needs exactly 7 values");
  return {f[0], f[1], f[2], f[3], f[4], f[5], f[6], label};
}

namespace metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Orders the pair so the shorter sequence indexes the DP row.
// Every measure below is symmetric, so the swap does not change the value.
void shorter_inner(std::span<const double>& a, std::span<const double>& b) {
  if (b.size() > a.size()) std::swap(a, b);
}

// MSM split/merge cost of inserting `x` next to `prev`, facing `other`.
double msm_split_merge(double x, double prev, double other, double c) {
  if ((prev <= x && x <= other) || (prev >= x && x >= other)) return c;
  return c + std::min(std::abs(x - prev), std::abs(x - other));
}

}  // namespace

double dtw_distance(std::span<const double> a, std::span<const double> b,
                    std::optional<std::size_t> band) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "dtw on empty sequence");
  shorter_inner(a, b);
  const std::size_t n = a.size(), m = b.size();
  const std::size_t w = band.value_or(std::max(n, m));
  if (w < n - m)
    throw Error(ErrorCode::BandTooNarrow, "band " + std::to_string(w) +
                                              " is narrower than the length difference " +
                                              std::to_string(n - m));

  std::vector<double> prev(m + 1, kInf), cur(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > w ? i - w : 1;
    const std::size_t hi = std::min(m, i + w);
    cur[lo - 1] = kInf;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double best = std::min({prev[j - 1], prev[j], cur[j - 1]});
      cur[j] = std::abs(a[i - 1] - b[j - 1]) + best;
    }
    if (hi < m) cur[hi + 1] = kInf;
    std::swap(prev, cur);
  }
  return prev[m];
}

double minkowski_distance(std::span<const double> a, std::span<const double> b, double p) {
  if (a.size() != b.size())
    throw Error(ErrorCode::LengthMismatch, "minkowski needs equal lengths (align first)");
  if (a.empty()) throw Error(ErrorCode::EmptyInput, "minkowski on empty sequences");
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::BadParam, "minkowski p must be >= 1");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::pow(std::abs(a[k] - b[k]), p);
  return std::pow(acc, 1.0 / p);
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "correlation needs equal lengths");
  if (a.empty()) throw Error(ErrorCode::EmptyInput, "correlation on empty sequences");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double da = a[k] - ma, db = b[k] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0))
    throw Error(ErrorCode::ZeroVariance, "correlation of a constant sequence");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::size_t edr(std::span<const double> a, std::span<const double> b, double epsilon) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::BadParam, "edr epsilon must be >= 0");
  shorter_inner(a, b);
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t subst = std::abs(a[i - 1] - b[j - 1]) <= epsilon ? 0 : 1;
      cur[j] = std::min({prev[j - 1] + subst, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double erp(std::span<const double> a, std::span<const double> b, double gap) {
  if (!std::isfinite(gap)) throw Error(ErrorCode::BadParam, "erp gap must be finite");
  shorter_inner(a, b);
  const std::size_t n = a.size(), m = b.size();
  std::vector<double> prev(m + 1), cur(m + 1);
  prev[0] = 0.0;
  for (std::size_t j = 1; j <= m; ++j) prev[j] = prev[j - 1] + std::abs(b[j - 1] - gap);
  for (std::size_t i = 1; i <= n; ++i) {
    const double ai = a[i - 1];
    const double a_gap = std::abs(ai - gap);
    cur[0] = prev[0] + a_gap;
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = std::min({prev[j - 1] + std::abs(ai - b[j - 1]), prev[j] + a_gap,
                         cur[j - 1] + std::abs(b[j - 1] - gap)});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::size_t lcss_length(std::span<const double> a, std::span<const double> b, double epsilon) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::BadParam, "lcss epsilon must be >= 0");
  shorter_inner(a, b);
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = std::abs(a[i - 1] - b[j - 1]) <= epsilon ? prev[j - 1] + 1
                                                         : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double msm(std::span<const double> a, std::span<const double> b, double cost) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "msm on empty sequence");
  if (!(cost > 0.0) || !std::isfinite(cost)) throw Error(ErrorCode::BadParam, "msm cost must be > 0");
  shorter_inner(a, b);
  const std::size_t n = a.size(), m = b.size();
  // Rows are 0-based here: row[j] holds D[i][j+1] in 1-based notation.
  std::vector<double> prev(m), cur(m);
  prev[0] = std::abs(a[0] - b[0]);
  for (std::size_t j = 1; j < m; ++j)
    prev[j] = prev[j - 1] + msm_split_merge(b[j], b[j - 1], a[0], cost);
  for (std::size_t i = 1; i < n; ++i) {
    cur[0] = prev[0] + msm_split_merge(a[i], a[i - 1], b[0], cost);
    for (std::size_t j = 1; j < m; ++j) {
      cur[j] = std::min({prev[j - 1] + std::abs(a[i] - b[j]),
                         prev[j] + msm_split_merge(a[i], a[i - 1], b[j], cost),
                         cur[j - 1] + msm_split_merge(b[j], b[j - 1], a[i], cost)});
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

FeatureRow feature_vector(const Sequence& control, const Sequence& assessed,
                          const MetricParams& params) {
  params.validate();
  if (control.empty() || assessed.empty())
    throw Error(ErrorCode::EmptyInput, "feature_vector needs two non-empty sequences");
  const auto a = control.view();
  const auto b = assessed.view();
  const auto [aligned_a, aligned_b] = signal::dtw_align(control, assessed);

  FeatureRow row;
  row.dtw = dtw_distance(a, b, params.dtw_band);
  row.minkowski = minkowski_distance(aligned_a.view(), aligned_b.view(), params.minkowski_p);
  row.corr = correlation(aligned_a.view(), aligned_b.view());
  row.edr = static_cast<double>(edr(a, b, params.edr_epsilon)) /
            static_cast<double>(std::max(a.size(), b.size()));
  row.erp = erp(a, b, params.erp_gap);
  row.lcss = static_cast<double>(lcss_length(a, b, params.lcss_epsilon)) /
             static_cast<double>(std::min(a.size(), b.size()));
  row.msm = msm(a, b, params.msm_cost);
  return row;
}

}  // namespace metrics
}  // namespace sylblend
