#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "sylblend/matrix.hpp"

namespace sylblend {

enum class ClassifierKind { knn, decision_tree, random_forest, logistic_regression, svm, naive_bayes };

inline constexpr std::array<ClassifierKind, 6> kAllKinds = {
    ClassifierKind::knn,         ClassifierKind::decision_tree,
    ClassifierKind::random_forest, ClassifierKind::logistic_regression,
    ClassifierKind::svm,         ClassifierKind::naive_bayes};

/// Default sweep pool.
inline constexpr std::array<ClassifierKind, 5> kDefaultPool = {
    ClassifierKind::knn, ClassifierKind::random_forest, ClassifierKind::svm,
    ClassifierKind::logistic_regression, ClassifierKind::decision_tree};

std::string_view to_string(ClassifierKind kind);
/// Accepts the canonical names plus the short aliases knn/dt/rf/lr/svc/nb.
ClassifierKind kind_from_string(std::string_view name);

struct KnnParams {
  std::size_t k = 5;
  friend bool operator==(const KnnParams&, const KnnParams&) = default;
};

struct TreeParams {
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_split = 2;
  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_features = 0;  // 0 = floor(sqrt(feature count))
  std::size_t max_depth = 0;
  std::size_t min_samples_split = 2;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct LogisticParams {
  double learning_rate = 0.1;
  std::size_t epochs = 1000;
  double l2 = 1e-4;
  friend bool operator==(const LogisticParams&, const LogisticParams&) = default;
};

struct SvmParams {
  double lambda = 1e-3;
  std::size_t epochs = 1000;
  friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

struct NaiveBayesParams {
  double var_smoothing = 1e-9;
  friend bool operator==(const NaiveBayesParams&, const NaiveBayesParams&) = default;
};

/// Alternative order matches ClassifierKind.
using Hyperparameters =
    std::variant<KnnParams, TreeParams, ForestParams, LogisticParams, SvmParams, NaiveBayesParams>;

struct ClassifierSpec {
  Hyperparameters hyper;
  std::uint64_t seed = 0;

  ClassifierKind kind() const noexcept { return static_cast<ClassifierKind>(hyper.index()); }
  static ClassifierSpec defaults(ClassifierKind kind, std::uint64_t seed = 0);
  void validate() const;

  friend bool operator==(const ClassifierSpec&, const ClassifierSpec&) = default;
};

// ---- trained state --------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // rows with x[feature] <= threshold go left
  int left = -1;
  int right = -1;
  double score = 0.0;  // class-1 fraction of the training rows reaching the node
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double score(std::span<const double> x) const;
};

struct KnnState {
  FeatureMatrix train_x;
  Labels train_y;
};
struct TreeState {
  Tree tree;
};
struct ForestState {
  std::vector<Tree> trees;
};
/// Linear decision function on standardized columns.
struct LinearState {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> weights;
  double bias = 0.0;
  double decision(std::span<const double> x) const;
};
struct LogisticState : LinearState {};
struct SvmState : LinearState {};
struct NaiveBayesState {
  std::array<double, 2> prior{};
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> variance;
};

using ModelState =
    std::variant<KnnState, TreeState, ForestState, LogisticState, SvmState, NaiveBayesState>;

struct Model {
  ClassifierSpec spec;
  std::size_t n_features = 0;
  ModelState state;

  ClassifierKind kind() const noexcept { return spec.kind(); }
};

namespace learners {

/// Trains one classifier. Single-class input yields a model that predicts
/// that class everywhere.
Model fit(const ClassifierSpec& spec, const FeatureMatrix& x, const Labels& y);

/// Class-1 score per row: neighbour vote fraction (knn), leaf class-1
/// fraction (decision_tree), fraction of trees voting 1 (random_forest),
/// sigmoid probability (logistic_regression), margin (svm), posterior
/// (naive_bayes).
std::vector<double> predict_score(const Model& m, const FeatureMatrix& x);

/// predict == (predict_score > decision_threshold) for every kind, so exact
/// ties resolve to class 0.
Labels predict(const Model& m, const FeatureMatrix& x);

double decision_threshold(ClassifierKind kind);

/// CART tree on a row subset; exposed for tests and the forest.
Tree grow_tree(const FeatureMatrix& x, const Labels& y, std::span<const std::size_t> rows,
               const TreeParams& params, std::size_t features_per_split, std::uint64_t seed);

}  // namespace learners
}  // namespace sylblend
