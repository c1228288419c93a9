#include "sylblend/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <utility>

#include "sylblend/error.hpp"
#include "sylblend/rng.hpp"

namespace sylblend {

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::decision_tree: return "decision_tree";
    case ClassifierKind::random_forest: return "random_forest";
    case ClassifierKind::logistic_regression: return "logistic_regression";
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::naive_bayes: return "naive_bayes";
  }
  return "knn";
}

ClassifierKind kind_from_string(std::string_view name) {
  for (auto k : kAllKinds)
    if (to_string(k) == name) return k;
  if (name == "dt") return ClassifierKind::decision_tree;
  if (name == "rf") return ClassifierKind::random_forest;
  if (name == "lr") return ClassifierKind::logistic_regression;
  if (name == "svc") return ClassifierKind::svm;
  if (name == "nb") return ClassifierKind::naive_bayes;
  throw Error(ErrorCode::BadParam, "unknown classifier kind '" + std::string(name) + "'");
}

ClassifierSpec ClassifierSpec::defaults(ClassifierKind kind, std::uint64_t seed) {
  ClassifierSpec spec;
  spec.seed = seed;
  switch (kind) {
    case ClassifierKind::knn: spec.hyper = KnnParams{}; break;
    case ClassifierKind::decision_tree: spec.hyper = TreeParams{}; break;
    case ClassifierKind::random_forest: spec.hyper = ForestParams{}; break;
    case ClassifierKind::logistic_regression: spec.hyper = LogisticParams{}; break;
    case ClassifierKind::svm: spec.hyper = SvmParams{}; break;
    case ClassifierKind::naive_bayes: spec.hyper = NaiveBayesParams{}; break;
  }
  return spec;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::BadParam, what);
}

}  // namespace

void ClassifierSpec::validate() const {
  std::visit(overloaded{
                 [](const KnnParams& p) { require(p.k >= 1, "knn k must be >= 1"); },
                 [](const TreeParams& p) {
                   require(p.min_samples_split >= 2, "min_samples_split must be >= 2");
                 },
                 [](const ForestParams& p) {
                   require(p.n_trees >= 1, "forest needs at least one tree");
                   require(p.min_samples_split >= 2, "min_samples_split must be >= 2");
                 },
                 [](const LogisticParams& p) {
                   require(p.learning_rate > 0.0 && std::isfinite(p.learning_rate),
                           "learning rate must be positive");
                   require(p.l2 >= 0.0 && std::isfinite(p.l2), "l2 must be >= 0");
                 },
                 [](const SvmParams& p) {
                   require(p.lambda > 0.0 && std::isfinite(p.lambda), "svm lambda must be positive");
                 },
                 [](const NaiveBayesParams& p) {
                   require(p.var_smoothing >= 0.0 && std::isfinite(p.var_smoothing),
                           "var_smoothing must be >= 0");
                 },
             },
             hyper);
}

double Tree::score(std::span<const double> x) const {
  std::size_t at = 0;
  while (nodes[at].feature >= 0) {
    const auto& node = nodes[at];
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                      ? node.left
                                      : node.right);
  }
  return nodes[at].score;
}

double LinearState::decision(std::span<const double> x) const {
  double z = bias;
  for (std::size_t f = 0; f < weights.size(); ++f) z += weights[f] * ((x[f] - mean[f]) / scale[f]);
  return z;
}

namespace learners {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---- CART ----------------------------------------------------------------

struct Split {
  bool valid = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double child_impurity = std::numeric_limits<double>::infinity();  // n-weighted Gini / 2

  bool better_than(const Split& o) const {
    if (!o.valid) return true;
    if (child_impurity != o.child_impurity) return child_impurity < o.child_impurity;
    if (feature != o.feature) return feature < o.feature;
    return threshold < o.threshold;
  }
};

// Row indices of the full matrix sorted by each feature, computed once per
// fit and shared by every tree grown from it.
using ColumnOrder = std::vector<std::vector<std::uint32_t>>;

ColumnOrder sort_columns(const FeatureMatrix& x) {
  ColumnOrder order(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& ids = order[f];
    ids.resize(x.rows());
    std::iota(ids.begin(), ids.end(), std::uint32_t{0});
    std::stable_sort(ids.begin(), ids.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
  }
  return order;
}

// Each feature keeps its own ordering of the sample; a node owns the same
// [begin, end) range in every ordering, and splitting stable-partitions
// every ordering so the ranges stay sorted without re-sorting.
class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const Labels& y, std::span<const std::size_t> rows,
              const ColumnOrder& column_order, const TreeParams& params,
              std::size_t features_per_split, std::uint64_t seed)
      : params_(params), rng_(seed), n_features_(x.cols()) {
    per_split_ = (features_per_split == 0 || features_per_split > n_features_) ? n_features_
                                                                              : features_per_split;
    // Group sample positions by training row so each ordering can be
    // expanded from the shared column order in linear time.
    std::vector<std::uint32_t> multiplicity(x.rows(), 0);
    for (auto r : rows) ++multiplicity[r];
    std::vector<std::uint32_t> first(x.rows() + 1, 0);
    for (std::size_t r = 0; r < x.rows(); ++r) first[r + 1] = first[r] + multiplicity[r];
    const std::size_t m = rows.size();
    labels_.resize(m);
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (auto s = first[r]; s < first[r + 1]; ++s) labels_[s] = static_cast<char>(y[r]);

    ids_.assign(n_features_, std::vector<std::uint32_t>(m));
    values_.assign(n_features_, std::vector<double>(m));
    for (std::size_t f = 0; f < n_features_; ++f) {
      std::size_t k = 0;
      for (auto r : column_order[f]) {
        for (auto s = first[r]; s < first[r + 1]; ++s, ++k) {
          ids_[f][k] = s;
          values_[f][k] = x(r, f);
        }
      }
    }
    feature_order_.resize(n_features_);
    goes_left_.resize(m);
    id_buffer_.resize(m);
    value_buffer_.resize(m);
  }

  Tree build() {
    grow(0, labels_.size(), 0);
    return std::move(tree_);
  }

 private:
  static double side_impurity(double zeros, double ones) {
    const double n = zeros + ones;
    return n > 0.0 ? zeros * ones / n : 0.0;
  }

  void scan_feature(std::size_t begin, std::size_t end, std::size_t f, std::size_t total_ones,
                    Split& best) const {
    const auto& ids = ids_[f];
    const auto& vals = values_[f];
    const auto n = static_cast<double>(end - begin);
    double left_ones = 0.0;
    for (std::size_t k = begin; k + 1 < end; ++k) {
      left_ones += labels_[ids[k]];
      const double lo = vals[k], hi = vals[k + 1];
      if (!(lo < hi)) continue;
      const auto nl = static_cast<double>(k + 1 - begin);
      const double right_ones = static_cast<double>(total_ones) - left_ones;
      const double impurity =
          side_impurity(nl - left_ones, left_ones) + side_impurity(n - nl - right_ones, right_ones);
      if (best.valid && impurity > best.child_impurity) continue;
      Split cand;
      cand.valid = true;
      cand.feature = f;
      cand.threshold = lo + (hi - lo) / 2.0;
      if (!(cand.threshold < hi)) cand.threshold = lo;
      cand.child_impurity = impurity;
      if (cand.better_than(best)) best = cand;
    }
  }

  int grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::size_t count = end - begin;
    std::size_t ones = 0;
    for (std::size_t k = begin; k < end; ++k) ones += static_cast<std::size_t>(labels_[ids_[0][k]]);
    tree_.nodes[static_cast<std::size_t>(index)].score =
        static_cast<double>(ones) / static_cast<double>(count);

    const bool pure = ones == 0 || ones == count;
    const bool too_deep = params_.max_depth != 0 && depth >= params_.max_depth;
    if (pure || too_deep || count < params_.min_samples_split) return index;

    std::iota(feature_order_.begin(), feature_order_.end(), std::size_t{0});
    if (per_split_ < n_features_) rng_.shuffle(feature_order_.begin(), feature_order_.end());
    Split best;
    for (std::size_t q = 0; q < n_features_; ++q) {
      if (q >= per_split_ && best.valid) break;
      scan_feature(begin, end, feature_order_[q], ones, best);
    }
    if (!best.valid) return index;

    std::size_t left_count = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const bool left = values_[best.feature][k] <= best.threshold;
      goes_left_[ids_[best.feature][k]] = left;
      left_count += left ? 1 : 0;
    }
    for (std::size_t f = 0; f < n_features_; ++f) {
      auto& ids = ids_[f];
      auto& vals = values_[f];
      std::size_t l = begin, r = 0;
      for (std::size_t k = begin; k < end; ++k) {
        if (goes_left_[ids[k]]) {
          ids[l] = ids[k];
          vals[l++] = vals[k];
        } else {
          id_buffer_[r] = ids[k];
          value_buffer_[r++] = vals[k];
        }
      }
      std::copy_n(id_buffer_.begin(), r, ids.begin() + static_cast<std::ptrdiff_t>(l));
      std::copy_n(value_buffer_.begin(), r, vals.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const std::size_t mid = begin + left_count;
    const int l = grow(begin, mid, depth + 1);
    const int r = grow(mid, end, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  TreeParams params_;
  Rng rng_;
  std::size_t n_features_ = 0;
  std::size_t per_split_ = 0;
  std::vector<char> labels_;  // per sample position
  std::vector<std::vector<std::uint32_t>> ids_;
  std::vector<std::vector<double>> values_;
  std::vector<std::size_t> feature_order_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> id_buffer_;
  std::vector<double> value_buffer_;
  Tree tree_;
};

// ---- per-kind fitting ------------------------------------------------------

void standardize_columns(const FeatureMatrix& x, LinearState& s) {
  const std::size_t n = x.rows(), d = x.cols();
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < d; ++f) s.mean[f] += x(i, f);
  for (auto& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < d; ++f) {
      const double c = x(i, f) - s.mean[f];
      s.scale[f] += c * c;
    }
  for (auto& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 0.0)) v = 1.0;
  }
  s.weights.assign(d, 0.0);
  s.bias = 0.0;
}

FeatureMatrix standardized(const FeatureMatrix& x, const LinearState& s) {
  FeatureMatrix z(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t f = 0; f < x.cols(); ++f) z(i, f) = (x(i, f) - s.mean[f]) / s.scale[f];
  return z;
}

LogisticState fit_logistic(const LogisticParams& p, const FeatureMatrix& x, const Labels& y,
                           std::optional<int> constant) {
  LogisticState s;
  standardize_columns(x, s);
  if (constant) {
    s.bias = *constant == 1 ? 4.0 : -4.0;
    return s;
  }
  const FeatureMatrix z = standardized(x, s);
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> grad(d);
  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = z.row(i);
      double logit = s.bias;
      for (std::size_t f = 0; f < d; ++f) logit += s.weights[f] * row[f];
      const double err = sigmoid(logit) - static_cast<double>(y[i]);
      for (std::size_t f = 0; f < d; ++f) grad[f] += err * row[f];
      grad_bias += err;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t f = 0; f < d; ++f)
      s.weights[f] -= p.learning_rate * (grad[f] * inv_n + p.l2 * s.weights[f]);
    s.bias -= p.learning_rate * grad_bias * inv_n;
  }
  return s;
}

// Pegasos with the bias folded in as a constant (regularized) feature.
SvmState fit_svm(const SvmParams& p, const FeatureMatrix& x, const Labels& y, std::uint64_t seed,
                 std::optional<int> constant) {
  SvmState s;
  standardize_columns(x, s);
  if (constant) {
    s.bias = *constant == 1 ? 1.0 : -1.0;
    return s;
  }
  const FeatureMatrix z = standardized(x, s);
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> w(d + 1, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  const double radius2 = 1.0 / p.lambda;
  double t = 0.0;
  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (auto i : order) {
      t += 1.0;
      const double eta = 1.0 / (p.lambda * t);
      const auto row = z.row(i);
      const double sign = y[i] == 1 ? 1.0 : -1.0;
      double margin = w[d];
      for (std::size_t f = 0; f < d; ++f) margin += w[f] * row[f];
      margin *= sign;
      const double shrink = 1.0 - eta * p.lambda;
      for (auto& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t f = 0; f < d; ++f) w[f] += eta * sign * row[f];
        w[d] += eta * sign;
      }
      double norm2 = 0.0;
      for (double v : w) norm2 += v * v;
      if (norm2 > radius2) {
        const double scale = std::sqrt(radius2 / norm2);
        for (auto& v : w) v *= scale;
      }
    }
  }
  std::copy(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d), s.weights.begin());
  s.bias = w[d];
  return s;
}

NaiveBayesState fit_naive_bayes(const NaiveBayesParams& p, const FeatureMatrix& x, const Labels& y) {
  const std::size_t n = x.rows(), d = x.cols();
  NaiveBayesState s;
  std::array<std::size_t, 2> counts{0, 0};
  for (int c : {0, 1}) {
    s.mean[c].assign(d, 0.0);
    s.variance[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    ++counts[c];
    for (std::size_t f = 0; f < d; ++f) s.mean[c][f] += x(i, f);
  }
  for (std::size_t c = 0; c < 2; ++c)
    if (counts[c] > 0)
      for (auto& m : s.mean[c]) m /= static_cast<double>(counts[c]);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    for (std::size_t f = 0; f < d; ++f) {
      const double dev = x(i, f) - s.mean[c][f];
      s.variance[c][f] += dev * dev;
    }
  }
  for (std::size_t c = 0; c < 2; ++c)
    if (counts[c] > 0)
      for (auto& v : s.variance[c]) v /= static_cast<double>(counts[c]);

  // Smoothing scaled by the widest overall feature variance.
  double widest = 0.0;
  for (std::size_t f = 0; f < d; ++f) {
    double mean = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, f);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) ss += (x(i, f) - mean) * (x(i, f) - mean);
    widest = std::max(widest, ss / static_cast<double>(n));
  }
  double epsilon = p.var_smoothing * widest;
  if (!(epsilon > 0.0)) epsilon = std::max(p.var_smoothing, std::numeric_limits<double>::min());

  for (std::size_t c = 0; c < 2; ++c) {
    s.prior[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
    if (counts[c] == 0) {
      // Absent class: borrow the other class's shape; its zero prior decides.
      s.mean[c] = s.mean[1 - c];
      s.variance[c] = s.variance[1 - c];
    }
  }
  for (std::size_t c = 0; c < 2; ++c)
    for (auto& v : s.variance[c]) v += epsilon;
  return s;
}

double naive_bayes_score(const NaiveBayesState& s, std::span<const double> x) {
  std::array<double, 2> log_joint{};
  for (std::size_t c = 0; c < 2; ++c) {
    double acc = std::log(s.prior[c]);
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double var = s.variance[c][f];
      const double dev = x[f] - s.mean[c][f];
      acc += -0.5 * std::log(2.0 * std::numbers::pi * var) - dev * dev / (2.0 * var);
    }
    log_joint[c] = acc;
  }
  return 1.0 / (1.0 + std::exp(log_joint[0] - log_joint[1]));
}

double knn_score(const KnnState& s, std::size_t k, std::span<const double> x,
                 std::vector<std::pair<double, std::size_t>>& scratch) {
  const std::size_t n = s.train_x.rows();
  k = std::min(k, n);
  scratch.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = s.train_x.row(i);
    double dist = 0.0;
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double diff = row[f] - x[f];
      dist += diff * diff;
    }
    scratch.emplace_back(dist, i);
  }
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
  std::size_t ones = 0;
  for (std::size_t q = 0; q < k; ++q) ones += static_cast<std::size_t>(s.train_y[scratch[q].second]);
  return static_cast<double>(ones) / static_cast<double>(k);
}

void check_input(const FeatureMatrix& x, const Labels& y) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit on an empty matrix");
  if (y.size() != x.rows())
    throw Error(ErrorCode::ShapeMismatch, "label count differs from row count");
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (double v : x.row(i))
      if (!std::isfinite(v))
        throw Error(ErrorCode::NonFiniteFeature, "row " + std::to_string(i) + " has a non-finite feature");
  for (int label : y)
    if (label != 0 && label != 1) throw Error(ErrorCode::LabelError, "labels must be 0 or 1");
}

}  // namespace

Tree grow_tree(const FeatureMatrix& x, const Labels& y, std::span<const std::size_t> rows,
               const TreeParams& params, std::size_t features_per_split, std::uint64_t seed) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "tree on no rows");
  TreeBuilder builder(x, y, rows, sort_columns(x), params, features_per_split, seed);
  return builder.build();
}

Model fit(const ClassifierSpec& spec, const FeatureMatrix& x, const Labels& y) {
  spec.validate();
  check_input(x, y);
  const std::size_t n = x.rows();
  const auto ones = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  std::optional<int> constant;
  if (ones == 0) constant = 0;
  if (ones == n) constant = 1;

  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

  Model model{.spec = spec, .n_features = x.cols(), .state = {}};
  model.state = std::visit(
      overloaded{
          [&](const KnnParams&) -> ModelState { return KnnState{x, y}; },
          [&](const TreeParams& p) -> ModelState {
            return TreeState{grow_tree(x, y, all_rows, p, 0, spec.seed)};
          },
          [&](const ForestParams& p) -> ModelState {
            const std::size_t per_split =
                p.max_features != 0
                    ? p.max_features
                    : std::max<std::size_t>(1, static_cast<std::size_t>(
                                                   std::floor(std::sqrt(static_cast<double>(x.cols())))));
            const TreeParams tree_params{.max_depth = p.max_depth,
                                         .min_samples_split = p.min_samples_split};
            ForestState forest;
            forest.trees.reserve(p.n_trees);
            const ColumnOrder order = sort_columns(x);
            std::vector<std::size_t> sample(n);
            for (std::size_t t = 0; t < p.n_trees; ++t) {
              Rng bootstrap(derive_seed(spec.seed, 2 * t));
              for (auto& r : sample) r = bootstrap.index(n);
              TreeBuilder builder(x, y, sample, order, tree_params, per_split,
                                  derive_seed(spec.seed, 2 * t + 1));
              forest.trees.push_back(builder.build());
            }
            return forest;
          },
          [&](const LogisticParams& p) -> ModelState { return fit_logistic(p, x, y, constant); },
          [&](const SvmParams& p) -> ModelState { return fit_svm(p, x, y, spec.seed, constant); },
          [&](const NaiveBayesParams& p) -> ModelState { return fit_naive_bayes(p, x, y); },
      },
      spec.hyper);
  return model;
}

std::vector<double> predict_score(const Model& m, const FeatureMatrix& x) {
  std::vector<double> scores;
  if (x.empty()) return scores;
  if (x.cols() != m.n_features)
    throw Error(ErrorCode::ShapeMismatch, "model expects " + std::to_string(m.n_features) +
                                              " columns, got " + std::to_string(x.cols()));
  scores.reserve(x.rows());
  std::vector<std::pair<double, std::size_t>> scratch;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    const double s = std::visit(
        overloaded{
            [&](const KnnState& st) {
              return knn_score(st, std::get<KnnParams>(m.spec.hyper).k, row, scratch);
            },
            [&](const TreeState& st) { return st.tree.score(row); },
            [&](const ForestState& st) {
              std::size_t votes = 0;
              for (const auto& t : st.trees) votes += t.score(row) > 0.5 ? 1 : 0;
              return static_cast<double>(votes) / static_cast<double>(st.trees.size());
            },
            [&](const LogisticState& st) { return sigmoid(st.decision(row)); },
            [&](const SvmState& st) { return st.decision(row); },
            [&](const NaiveBayesState& st) { return naive_bayes_score(st, row); },
        },
        m.state);
    scores.push_back(s);
  }
  return scores;
}

double decision_threshold(ClassifierKind kind) { return kind == ClassifierKind::svm ? 0.0 : 0.5; }

Labels predict(const Model& m, const FeatureMatrix& x) {
  const auto scores = predict_score(m, x);
  const double threshold = decision_threshold(m.kind());
  Labels out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s > threshold ? 1 : 0);
  return out;
}

}  // namespace learners
}  // namespace sylblend
