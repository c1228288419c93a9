#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "sylblend/learners.hpp"
#include "sylblend/matrix.hpp"

namespace sylblend {

enum class MetaFeatureMode { labels, scores };

std::string_view to_string(MetaFeatureMode mode);
MetaFeatureMode meta_mode_from_string(std::string_view name);

/// Blending setup: the "additional" base classifiers, the "main" meta
/// classifier, and the held-out fraction used to train the meta level.
struct BlendConfig {
  std::vector<ClassifierSpec> base_specs;
  ClassifierSpec meta_spec;
  double val_fraction = 0.3;
  MetaFeatureMode meta_feature_mode = MetaFeatureMode::labels;
  std::uint64_t seed = 0;

  friend bool operator==(const BlendConfig&, const BlendConfig&) = default;
};

struct BlendEnsemble {
  std::vector<Model> base_models;
  Model meta_model;
  BlendConfig config;
};

/// Fits one base model; swapped out in tests to inject hand-built models.
using BaseFitter = std::function<Model(const ClassifierSpec&, const FeatureMatrix&, const Labels&)>;

namespace blend {

/// Copies of the pool, in order, with member seeds derived from `seed` by
/// position. Duplicate kinds are kept and get distinct seeds.
std::vector<ClassifierSpec> get_models(std::span<const ClassifierSpec> pool, std::uint64_t seed);
std::vector<ClassifierSpec> get_models(std::span<const ClassifierKind> pool, std::uint64_t seed);

/// Default-hyperparameter config; base and meta seeds are derived from
/// `seed` on separate streams.
BlendConfig make_config(ClassifierKind meta, std::span<const ClassifierKind> bases, std::uint64_t seed);

/// One column per base model: its hard label or its score for each row.
FeatureMatrix meta_features(std::span<const Model> base_models, const FeatureMatrix& x,
                            MetaFeatureMode mode);

/// Stratified split into base-train / blend-validation; bases are fit on
/// the first part and the meta model on their outputs for the second.
BlendEnsemble fit_ensemble(const BlendConfig& config, const FeatureMatrix& x, const Labels& y,
                           const BaseFitter& fit_base = learners::fit);

/// Bases predict, their outputs are pooled, the meta model decides.
Labels predict_ensemble(const BlendEnsemble& e, const FeatureMatrix& x);

}  // namespace blend
}  // namespace sylblend
