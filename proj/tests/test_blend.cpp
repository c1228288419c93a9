#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <set>

#include "support.hpp"
#include "sylblend/blend.hpp"
#include "sylblend/error.hpp"
#include "sylblend/serialization.hpp"

using namespace sylblend;
namespace ts = testsupport;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

Model tree_model(std::size_t n_features, std::vector<TreeNode> nodes) {
  Model m;
  m.spec = ClassifierSpec::defaults(ClassifierKind::decision_tree);
  m.n_features = n_features;
  m.state = TreeState{Tree{std::move(nodes)}};
  return m;
}

Model constant_model(std::size_t n_features, int c) {
  return tree_model(n_features, {TreeNode{-1, 0, -1, -1, double(c)}});
}

// class 1 iff x[f] > t (or the reverse when flipped)
Model stump(std::size_t n_features, int f, double t, bool flipped = false) {
  return tree_model(n_features, {TreeNode{f, t, 1, 2, 0}, TreeNode{-1, 0, -1, -1, flipped ? 1.0 : 0.0},
                                 TreeNode{-1, 0, -1, -1, flipped ? 0.0 : 1.0}});
}

// Hands out the given models in call order, ignoring the training data.
BaseFitter scripted(std::vector<Model> models) {
  auto next = std::make_shared<std::size_t>(0);
  return [models = std::move(models), next](const ClassifierSpec&, const FeatureMatrix&, const Labels&) {
    return models.at((*next)++ % models.size());
  };
}

double acc(const Labels& p, const Labels& y) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += p[i] == y[i];
  return static_cast<double>(ok) / y.size();
}

// label = x0 > 0; x1 is independent noise
void signal_task(std::uint64_t seed, std::size_t n, FeatureMatrix& x, Labels& y) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  x = FeatureMatrix::with_columns(2);
  y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const double row[2] = {u(gen), u(gen)};
    x.push_row(row);
    y.push_back(row[0] > 0);
  }
}

}  // namespace

TEST_CASE("get_models keeps order and derives distinct seeds") {
  const auto specs = blend::get_models(std::span<const ClassifierKind>(kDefaultPool), 42);
  REQUIRE(specs.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(specs[i].kind() == kDefaultPool[i]);
    CHECK(specs[i].hyper == ClassifierSpec::defaults(kDefaultPool[i]).hyper);
  }
  const std::vector<ClassifierKind> single{ClassifierKind::svm};
  CHECK(blend::get_models(single, 1).size() == 1);

  const std::vector<ClassifierKind> dup{ClassifierKind::svm, ClassifierKind::knn, ClassifierKind::svm};
  const auto d = blend::get_models(dup, 7);
  REQUIRE(d.size() == 3);
  CHECK(d[0].kind() == d[2].kind());
  CHECK(d[0].seed != d[2].seed);
  CHECK(blend::get_models(dup, 7) == d);
  CHECK(blend::get_models(dup, 8)[0].seed != d[0].seed);

  CHECK(code_of([] { blend::get_models(std::span<const ClassifierKind>(), 1); }) == ErrorCode::EmptyPool);
}

TEST_CASE("make_config gives meta and base roles different seeds") {
  const std::vector<ClassifierKind> bases{ClassifierKind::svm, ClassifierKind::knn};
  const auto c = blend::make_config(ClassifierKind::svm, bases, 3);
  CHECK(c.meta_spec.kind() == ClassifierKind::svm);
  CHECK(c.meta_spec.seed != c.base_specs[0].seed);
  CHECK(c.val_fraction == 0.3);
  CHECK(c.meta_feature_mode == MetaFeatureMode::labels);
}

TEST_CASE("meta_features shapes and constant columns") {
  FeatureMatrix x;
  Labels y;
  signal_task(1, 10, x, y);
  const std::vector<Model> three{constant_model(2, 0), constant_model(2, 1), stump(2, 0, 0)};
  const auto m = blend::meta_features(three, x, MetaFeatureMode::labels);
  CHECK(m.rows() == 10);
  CHECK(m.cols() == 3);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(m(i, 0) == 0);
    CHECK(m(i, 1) == 1);
    CHECK(m(i, 2) == y[i]);
  }
  const auto empty = blend::meta_features(three, FeatureMatrix::with_columns(2), MetaFeatureMode::labels);
  CHECK(empty.rows() == 0);
  CHECK(empty.cols() == 3);
  CHECK(code_of([&] { blend::meta_features(three, FeatureMatrix{{1, 2, 3}}, MetaFeatureMode::labels); }) ==
        ErrorCode::ShapeMismatch);
}

TEST_CASE("scores mode passes raw scores") {
  FeatureMatrix x;
  Labels y;
  ts::gaussian_task(2, 100, 1.5, 3, x, y);
  const std::vector<Model> bases{learners::fit(ClassifierSpec::defaults(ClassifierKind::logistic_regression), x, y)};
  const auto m = blend::meta_features(bases, x, MetaFeatureMode::scores);
  const auto s = learners::predict_score(bases[0], x);
  for (std::size_t i = 0; i < 100; ++i) CHECK(m(i, 0) == s[i]);
}

TEST_CASE("constant-0, constant-1 and oracle bases under a tree meta model") {
  FeatureMatrix xtr, xte;
  Labels ytr, yte;
  signal_task(3, 200, xtr, ytr);
  signal_task(4, 100, xte, yte);
  const std::vector<ClassifierKind> bases{ClassifierKind::knn, ClassifierKind::svm, ClassifierKind::logistic_regression};
  const auto config = blend::make_config(ClassifierKind::decision_tree, bases, 9);
  const auto e = blend::fit_ensemble(config, xtr, ytr,
                                     scripted({constant_model(2, 0), constant_model(2, 1), stump(2, 0, 0)}));
  CHECK(acc(blend::predict_ensemble(e, xte), yte) == 1.0);
  CHECK(e.meta_model.n_features == 3);
  // the only useful column is the oracle's
  const auto& root = std::get<TreeState>(e.meta_model.state).tree.nodes[0];
  CHECK(root.feature == 2);
}

TEST_CASE("identical perfect bases give the base accuracy") {
  FeatureMatrix xtr, xte;
  Labels ytr, yte;
  signal_task(5, 120, xtr, ytr);
  signal_task(6, 80, xte, yte);
  const std::vector<ClassifierKind> bases{ClassifierKind::knn, ClassifierKind::knn};
  for (auto meta : kAllKinds) {
    CAPTURE(to_string(meta));
    const auto e = blend::fit_ensemble(blend::make_config(meta, bases, 1), xtr, ytr,
                                       scripted({stump(2, 0, 0)}));
    const auto p = blend::predict_ensemble(e, xte);
    CHECK(acc(p, yte) == acc(learners::predict(stump(2, 0, 0), xte), yte));
    CHECK(p == yte);
  }
}

TEST_CASE("bases erring on disjoint regions plus a region column") {
  // label = x0 > 0; region = x1 > 0. Base A is right only outside the
  // region, base B only inside it, base C reports the region.
  FeatureMatrix xtr, xte;
  Labels ytr, yte;
  signal_task(7, 400, xtr, ytr);
  signal_task(8, 200, xte, yte);
  const Model a = tree_model(2, {TreeNode{1, 0, 1, 2, 0}, TreeNode{0, 0, 3, 4, 0}, TreeNode{0, 0, 5, 6, 0},
                                 TreeNode{-1, 0, -1, -1, 0}, TreeNode{-1, 0, -1, -1, 1},
                                 TreeNode{-1, 0, -1, -1, 1}, TreeNode{-1, 0, -1, -1, 0}});
  const Model b = tree_model(2, {TreeNode{1, 0, 1, 2, 0}, TreeNode{0, 0, 3, 4, 0}, TreeNode{0, 0, 5, 6, 0},
                                 TreeNode{-1, 0, -1, -1, 1}, TreeNode{-1, 0, -1, -1, 0},
                                 TreeNode{-1, 0, -1, -1, 0}, TreeNode{-1, 0, -1, -1, 1}});
  const Model c = stump(2, 1, 0);
  const std::vector<ClassifierKind> bases{ClassifierKind::knn, ClassifierKind::svm, ClassifierKind::decision_tree};
  for (auto meta : {ClassifierKind::decision_tree, ClassifierKind::random_forest, ClassifierKind::knn}) {
    CAPTURE(to_string(meta));
    const auto e = blend::fit_ensemble(blend::make_config(meta, bases, 2), xtr, ytr, scripted({a, b, c}));
    const double blended = acc(blend::predict_ensemble(e, xte), yte);
    for (const auto& m : {a, b, c}) CHECK(blended >= acc(learners::predict(m, xte), yte));
    CHECK(blended == 1.0);
  }
}

TEST_CASE("fit_ensemble with real learners") {
  FeatureMatrix xtr, xte;
  Labels ytr, yte;
  ts::gaussian_task(11, 300, 2.0, 4, xtr, ytr);
  ts::gaussian_task(12, 100, 2.0, 4, xte, yte);
  const std::vector<ClassifierKind> bases{ClassifierKind::knn, ClassifierKind::random_forest, ClassifierKind::svm};
  auto config = blend::make_config(ClassifierKind::logistic_regression, bases, 5);
  const auto e = blend::fit_ensemble(config, xtr, ytr);
  CHECK(e.base_models.size() == 3);
  CHECK(e.meta_model.n_features == e.base_models.size());
  CHECK(acc(blend::predict_ensemble(e, xte), yte) > 0.8);
  CHECK(io::to_json(blend::fit_ensemble(config, xtr, ytr)).dump() == io::to_json(e).dump());

  config.meta_feature_mode = MetaFeatureMode::scores;
  const auto s = blend::fit_ensemble(config, xtr, ytr);
  CHECK(acc(blend::predict_ensemble(s, xte), yte) > 0.8);
}

TEST_CASE("bases train on the base part only, meta on the validation part only") {
  FeatureMatrix x;
  Labels y;
  signal_task(13, 100, x, y);
  std::vector<std::size_t> seen_rows;
  BaseFitter spy = [&](const ClassifierSpec& spec, const FeatureMatrix& xb, const Labels& yb) {
    seen_rows.push_back(xb.rows());
    return learners::fit(spec, xb, yb);
  };
  const std::vector<ClassifierKind> bases{ClassifierKind::knn, ClassifierKind::decision_tree};
  const auto e = blend::fit_ensemble(blend::make_config(ClassifierKind::knn, bases, 3), x, y, spy);
  REQUIRE(seen_rows.size() == 2);
  CHECK(seen_rows[0] == seen_rows[1]);
  const auto& knn = std::get<KnnState>(e.meta_model.state);
  CHECK(knn.train_x.cols() == 2);
  CHECK(knn.train_x.rows() + seen_rows[0] == 100);
  CHECK(knn.train_x.rows() == 30);
}

TEST_CASE("predict_ensemble is row-independent") {
  FeatureMatrix x;
  Labels y;
  ts::gaussian_task(14, 200, 1.0, 3, x, y);
  const std::vector<ClassifierKind> bases{ClassifierKind::knn, ClassifierKind::naive_bayes, ClassifierKind::svm};
  const auto e = blend::fit_ensemble(blend::make_config(ClassifierKind::random_forest, bases, 8), x, y);
  const auto probe = x;
  const auto full = blend::predict_ensemble(e, probe);
  CHECK(blend::predict_ensemble(e, FeatureMatrix::with_columns(3)).empty());

  std::vector<std::size_t> perm(probe.rows());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 gen(1);
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto permuted = blend::predict_ensemble(e, probe.select_rows(perm));
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(permuted[i] == full[perm[i]]);
  for (std::size_t i = 0; i < 20; ++i) {
    const std::size_t one[1] = {i};
    CHECK(blend::predict_ensemble(e, probe.select_rows(one))[0] == full[i]);
  }
  CHECK(code_of([&] { blend::predict_ensemble(e, FeatureMatrix{{1, 2}}); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("fit_ensemble errors") {
  FeatureMatrix x;
  Labels y;
  signal_task(15, 40, x, y);
  BlendConfig empty;
  empty.meta_spec = ClassifierSpec::defaults(ClassifierKind::svm);
  CHECK(code_of([&] { blend::fit_ensemble(empty, x, y); }) == ErrorCode::EmptyPool);

  const std::vector<ClassifierKind> bases{ClassifierKind::knn};
  const auto config = blend::make_config(ClassifierKind::svm, bases, 1);
  Labels one_positive(40, 0);
  one_positive[5] = 1;
  CHECK(code_of([&] { blend::fit_ensemble(config, x, one_positive); }) == ErrorCode::DegenerateSplit);
  CHECK(code_of([&] { blend::fit_ensemble(config, x, Labels(40, 1)); }) == ErrorCode::DegenerateSplit);
}

TEST_CASE("meta mode names") {
  CHECK(meta_mode_from_string("scores") == MetaFeatureMode::scores);
  CHECK(to_string(MetaFeatureMode::labels) == "labels");
  CHECK_THROWS_AS(meta_mode_from_string("votes"), Error);
}
