#include "sylblend/blend.hpp"

#include <algorithm>
#include <string>

#include "sylblend/error.hpp"
#include "sylblend/rng.hpp"

namespace sylblend {

std::string_view to_string(MetaFeatureMode mode) {
  return mode == MetaFeatureMode::labels ? "labels" : "scores";
}

MetaFeatureMode meta_mode_from_string(std::string_view name) {
  if (name == "labels") return MetaFeatureMode::labels;
  if (name == "scores") return MetaFeatureMode::scores;
  throw Error(ErrorCode::BadParam, "unknown meta-feature mode '" + std::string(name) + "'");
}

namespace blend {

std::vector<ClassifierSpec> get_models(std::span<const ClassifierSpec> pool, std::uint64_t seed) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, "no classifiers in the pool");
  std::vector<ClassifierSpec> out(pool.begin(), pool.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].validate();
    out[i].seed = derive_seed(seed, i);
  }
  return out;
}

std::vector<ClassifierSpec> get_models(std::span<const ClassifierKind> pool, std::uint64_t seed) {
  std::vector<ClassifierSpec> specs;
  specs.reserve(pool.size());
  for (auto kind : pool) specs.push_back(ClassifierSpec::defaults(kind));
  return get_models(specs, seed);
}

BlendConfig make_config(ClassifierKind meta, std::span<const ClassifierKind> bases, std::uint64_t seed) {
  BlendConfig config;
  config.base_specs = get_models(bases, derive_seed(seed, 1));
  config.meta_spec = ClassifierSpec::defaults(meta, derive_seed(seed, 2));
  config.seed = seed;
  return config;
}

FeatureMatrix meta_features(std::span<const Model> base_models, const FeatureMatrix& x,
                            MetaFeatureMode mode) {
  FeatureMatrix out(x.rows(), base_models.size());
  for (std::size_t b = 0; b < base_models.size(); ++b) {
    if (mode == MetaFeatureMode::labels) {
      const auto labels = learners::predict(base_models[b], x);
      for (std::size_t i = 0; i < labels.size(); ++i) out(i, b) = labels[i];
    } else {
      const auto scores = learners::predict_score(base_models[b], x);
      for (std::size_t i = 0; i < scores.size(); ++i) out(i, b) = scores[i];
    }
  }
  return out;
}

BlendEnsemble fit_ensemble(const BlendConfig& config, const FeatureMatrix& x, const Labels& y,
                           const BaseFitter& fit_base) {
  if (config.base_specs.empty()) throw Error(ErrorCode::EmptyPool, "blend needs at least one base");
  if (y.size() != x.rows()) throw Error(ErrorCode::ShapeMismatch, "label count differs from row count");

  const auto parts = partition_rows(y, config.val_fraction, true, config.seed);
  const FeatureMatrix train_x = x.select_rows(parts.kept);
  const Labels train_y = select_labels(y, parts.kept);
  const FeatureMatrix val_x = x.select_rows(parts.held_out);
  const Labels val_y = select_labels(y, parts.held_out);

  auto has_both = [](const Labels& l) {
    return std::find(l.begin(), l.end(), 0) != l.end() && std::find(l.begin(), l.end(), 1) != l.end();
  };
  if (!has_both(train_y) || !has_both(val_y))
    throw Error(ErrorCode::DegenerateSplit, "base-train or validation part lacks a class");

  BlendEnsemble e;
  e.config = config;
  e.base_models.reserve(config.base_specs.size());
  for (const auto& spec : config.base_specs) e.base_models.push_back(fit_base(spec, train_x, train_y));

  const FeatureMatrix meta_x = meta_features(e.base_models, val_x, config.meta_feature_mode);
  e.meta_model = learners::fit(config.meta_spec, meta_x, val_y);
  return e;
}

Labels predict_ensemble(const BlendEnsemble& e, const FeatureMatrix& x) {
  if (x.empty()) return {};
  return learners::predict(e.meta_model, meta_features(e.base_models, x, e.config.meta_feature_mode));
}

}  // namespace blend
}  // namespace sylblend
