#include "sylblend/dataprep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sylblend/error.hpp"
#include "sylblend/rng.hpp"

namespace sylblend {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::original: return "original";
    case Variant::cleaned: return "cleaned";
    case Variant::rebalanced: return "rebalanced";
    case Variant::cleaned_rebalanced: return "cleaned_rebalanced";
  }
  return "original";
}

Variant variant_from_string(std::string_view name) {
  for (auto v : kAllVariants)
    if (to_string(v) == name) return v;
  throw Error(ErrorCode::BadParam, "unknown dataset variant '" + std::string(name) + "'");
}

std::size_t Dataset::count(int label) const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [label](const FeatureRow& r) { return r.label == label; }));
}

FeatureMatrix Dataset::features() const {
  FeatureMatrix m(rows.size(), kFeatureCount);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto f = rows[i].features();
    std::copy(f.begin(), f.end(), m.row(i).begin());
  }
  return m;
}

Labels Dataset::labels() const {
  Labels y;
  y.reserve(rows.size());
  for (const auto& r : rows) y.push_back(r.label);
  return y;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out{.rows = {}, .variant = variant, .phoneme_tag = phoneme_tag};
  out.rows.reserve(indices.size());
  for (auto i : indices) out.rows.push_back(rows[i]);
  return out;
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (double v : rows[i].features())
      if (!std::isfinite(v))
        throw Error(ErrorCode::NonFiniteFeature, "row " + std::to_string(i) + " has a non-finite feature");
    if (rows[i].label != 0 && rows[i].label != 1)
      throw Error(ErrorCode::LabelError, "row " + std::to_string(i) + " has a non-binary label");
  }
}

void SmoteParams::validate() const {
  if (n_clusters < 1) throw Error(ErrorCode::BadParam, "n_clusters must be >= 1");
  if (k_neighbors < 1) throw Error(ErrorCode::BadParam, "k_neighbors must be >= 1");
  if (!(cluster_balance_threshold >= 0.0 && cluster_balance_threshold <= 1.0))
    throw Error(ErrorCode::BadParam, "cluster_balance_threshold must lie in [0, 1]");
  if (!std::isfinite(density_exponent)) throw Error(ErrorCode::BadParam, "density_exponent must be finite");
}

namespace dataprep {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

Variant cleaned_tag(Variant v) {
  return (v == Variant::rebalanced || v == Variant::cleaned_rebalanced) ? Variant::cleaned_rebalanced
                                                                        : Variant::cleaned;
}

Variant rebalanced_tag(Variant v) {
  return (v == Variant::cleaned || v == Variant::cleaned_rebalanced) ? Variant::cleaned_rebalanced
                                                                     : Variant::rebalanced;
}

std::size_t nearest_centroid(std::span<const double> point, const FeatureMatrix& centroids,
                             double& best_distance) {
  std::size_t best = 0;
  best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_distance) {
      best_distance = d;
      best = c;
    }
  }
  return best;
}

FeatureMatrix kmeans_plus_plus(const FeatureMatrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  FeatureMatrix centroids = FeatureMatrix::with_columns(points.cols());
  centroids.push_row(points.row(rng.index(n)));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (centroids.rows() < k) {
    const auto latest = centroids.row(centroids.rows() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), latest));
      total += nearest[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        running += nearest[i];
        if (nearest[i] > 0.0 && running > target) {
          pick = i;
          break;
        }
      }
      // Rounding can leave target beyond the last partial sum.
      while (nearest[pick] == 0.0 && pick > 0) --pick;
    } else {
      pick = rng.index(n);
    }
    centroids.push_row(points.row(pick));
  }
  return centroids;
}

// Synthetic rows for one group of minority points, appended to `out`.
void smote_group(const FeatureMatrix& features, std::span<const std::size_t> members,
                 std::size_t count, std::size_t k_neighbors, int minority_label, Rng& rng,
                 std::vector<FeatureRow>& out) {
  if (count == 0 || members.empty()) return;
  const std::size_t m = members.size();
  const std::size_t k = std::min(k_neighbors, m - 1);
  std::vector<std::vector<std::size_t>> neighbors(m);

  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t pick = rng.index(m);
    const auto x = features.row(members[pick]);
    if (k == 0) {
      out.push_back(FeatureRow::from_features(x, minority_label));
      continue;
    }
    auto& nn = neighbors[pick];
    if (nn.empty()) {
      std::vector<std::pair<double, std::size_t>> by_distance;
      by_distance.reserve(m - 1);
      for (std::size_t o = 0; o < m; ++o)
        if (o != pick) by_distance.emplace_back(squared_distance(x, features.row(members[o])), o);
      std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(k),
                        by_distance.end());
      for (std::size_t q = 0; q < k; ++q) nn.push_back(by_distance[q].second);
    }
    const auto neighbor = features.row(members[nn[rng.index(k)]]);
    const double u = rng.uniform_closed();
    std::array<double, kFeatureCount> synthetic{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) synthetic[f] = x[f] + u * (neighbor[f] - x[f]);
    out.push_back(FeatureRow::from_features(synthetic, minority_label));
  }
}

// Largest-remainder apportionment of `total` by `weights` (sum 1).
std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total) {
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = weights[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    assigned += counts[i];
    remainders.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& l, const auto& r) { return l.first > r.first; });
  // Float error can make the floors overshoot; trim from the smallest remainders.
  for (std::size_t r = remainders.size(); assigned > total && r > 0; --r) {
    auto& c = counts[remainders[r - 1].second];
    if (c > 0) {
      --c;
      --assigned;
    }
  }
  for (std::size_t r = 0; assigned < total; r = (r + 1) % remainders.size()) {
    ++counts[remainders[r].second];
    ++assigned;
  }
  return counts;
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty column");
  const double pos = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Dataset iqr_clean(const Dataset& d, double fence_k) {
  Dataset out{.rows = {}, .variant = cleaned_tag(d.variant), .phoneme_tag = d.phoneme_tag};
  if (d.empty()) return out;
  if (!(fence_k >= 0.0) || !std::isfinite(fence_k))
    throw Error(ErrorCode::BadParam, "fence_k must be a finite non-negative number");

  std::array<double, kFeatureCount> lower{}, upper{};
  std::vector<double> column(d.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    for (std::size_t i = 0; i < d.size(); ++i) column[i] = d.rows[i].features()[f];
    std::sort(column.begin(), column.end());
    const double q1 = quantile_sorted(column, 0.25);
    const double q3 = quantile_sorted(column, 0.75);
    const double iqr = q3 - q1;
    lower[f] = q1 - fence_k * iqr;
    upper[f] = q3 + fence_k * iqr;
  }
  for (const auto& row : d.rows) {
    const auto f = row.features();
    bool inside = true;
    for (std::size_t k = 0; k < kFeatureCount && inside; ++k)
      inside = f[k] >= lower[k] && f[k] <= upper[k];
    if (inside) out.rows.push_back(row);
  }
  return out;
}

KMeansResult kmeans(const FeatureMatrix& points, std::size_t k, std::uint64_t seed) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "kmeans on no points");
  if (k < 1) throw Error(ErrorCode::BadParam, "kmeans needs k >= 1");
  const std::size_t n = points.rows(), dims = points.cols();
  k = std::min(k, n);

  Rng rng(seed);
  KMeansResult result;
  result.centroids = kmeans_plus_plus(points, k, rng);
  result.assignment.assign(n, 0);
  std::vector<double> distance(n);

  auto assign = [&] {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      result.assignment[i] = nearest_centroid(points.row(i), result.centroids, distance[i]);
      cost += distance[i];
    }
    result.cost = cost;
    result.cost_history.push_back(cost);
  };

  constexpr std::size_t kMaxIterations = 100;
  constexpr double kTolerance = 1e-4;
  for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
    assign();
    result.iterations = iter + 1;

    FeatureMatrix next(k, dims);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = result.assignment[i];
      ++sizes[c];
      auto dst = next.row(c);
      const auto src = points.row(i);
      for (std::size_t f = 0; f < dims; ++f) dst[f] += src[f];
    }
    for (std::size_t c = 0; c < k; ++c) {
      auto dst = next.row(c);
      if (sizes[c] > 0) {
        for (auto& v : dst) v /= static_cast<double>(sizes[c]);
        continue;
      }
      // Empty cluster: move it onto the point worst served by its centroid.
      const auto far = static_cast<std::size_t>(
          std::max_element(distance.begin(), distance.end()) - distance.begin());
      const auto src = points.row(far);
      std::copy(src.begin(), src.end(), dst.begin());
      distance[far] = 0.0;
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      shift = std::max(shift, std::sqrt(squared_distance(next.row(c), result.centroids.row(c))));
    result.centroids = std::move(next);
    if (shift < kTolerance) break;
  }
  assign();
  return result;
}

Dataset kmeans_smote(const Dataset& d, const SmoteParams& params) {
  params.validate();
  const std::size_t ones = d.count(1), zeros = d.count(0);
  if (ones == 0 || zeros == 0)
    throw Error(ErrorCode::SingleClass, "oversampling needs both classes present");

  Dataset out = d;
  out.variant = rebalanced_tag(d.variant);
  if (ones == zeros) return out;

  const int minority = zeros < ones ? 0 : 1;
  const std::size_t deficit = std::max(ones, zeros) - std::min(ones, zeros);
  const FeatureMatrix features = d.features();
  Rng rng(derive_seed(params.seed, 1));

  const auto clusters = kmeans(features, params.n_clusters, derive_seed(params.seed, 0));
  const std::size_t k = clusters.centroids.rows();
  std::vector<std::vector<std::size_t>> minority_members(k);
  std::vector<std::size_t> cluster_size(k, 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    ++cluster_size[clusters.assignment[i]];
    if (d.rows[i].label == minority) minority_members[clusters.assignment[i]].push_back(i);
  }

  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < k; ++c) {
    const auto m = minority_members[c].size();
    if (m > 0 && static_cast<double>(m) / static_cast<double>(cluster_size[c]) >=
                     params.cluster_balance_threshold)
      kept.push_back(c);
  }

  out.rows.reserve(d.size() + deficit);
  if (kept.empty()) {
    std::vector<std::size_t> all_minority;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.rows[i].label == minority) all_minority.push_back(i);
    smote_group(features, all_minority, deficit, params.k_neighbors, minority, rng, out.rows);
    return out;
  }

  // Sparsity = mean intra-minority distance ^ exponent / minority count,
  // handled in log space; single-point clusters have zero sparsity.
  std::vector<double> log_sparsity(kept.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t q = 0; q < kept.size(); ++q) {
    const auto& members = minority_members[kept[q]];
    const std::size_t m = members.size();
    if (m < 2) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        sum += std::sqrt(squared_distance(features.row(members[i]), features.row(members[j])));
    const double mean = sum / static_cast<double>(m * (m - 1) / 2);
    if (mean > 0.0)
      log_sparsity[q] = params.density_exponent * std::log(mean) - std::log(static_cast<double>(m));
  }
  const double top = *std::max_element(log_sparsity.begin(), log_sparsity.end());
  std::vector<double> weights(kept.size(), 1.0 / static_cast<double>(kept.size()));
  if (std::isfinite(top)) {
    double total = 0.0;
    for (std::size_t q = 0; q < kept.size(); ++q) total += (weights[q] = std::exp(log_sparsity[q] - top));
    for (auto& w : weights) w /= total;
  }

  const auto counts = apportion(weights, deficit);
  for (std::size_t q = 0; q < kept.size(); ++q)
    smote_group(features, minority_members[kept[q]], counts[q], params.k_neighbors, minority, rng,
                out.rows);
  return out;
}

const Dataset& DatasetVariants::get(Variant v) const {
  switch (v) {
    case Variant::original: return original;
    case Variant::cleaned: return cleaned;
    case Variant::rebalanced: return rebalanced;
    case Variant::cleaned_rebalanced: return cleaned_rebalanced;
  }
  return original;
}

DatasetVariants make_variants(const Dataset& d, const SmoteParams& params, double fence_k) {
  DatasetVariants v;
  v.original = d;
  v.original.variant = Variant::original;
  v.cleaned = iqr_clean(v.original, fence_k);
  v.rebalanced = kmeans_smote(v.original, params);
  v.cleaned_rebalanced = kmeans_smote(v.cleaned, params);
  return v;
}

}  // namespace dataprep
}  // namespace sylblend
