#include "sylblend/serialization.hpp"

#include <fstream>
#include <sstream>

#include "sylblend/error.hpp"

namespace sylblend::io {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

template <typename T>
T read_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

Json tree_to_json(const Tree& t) {
  Json nodes = Json::array();
  for (const auto& n : t.nodes) nodes.push_back(Json::array({n.feature, n.threshold, n.left, n.right, n.score}));
  return nodes;
}

Tree tree_from_json(const Json& j) {
  Tree t;
  t.nodes.reserve(j.size());
  for (const auto& n : j) {
    if (!n.is_array() || n.size() != 5) throw Error(ErrorCode::FormatError, "tree node must be a 5-element array");
    t.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(), n[4].get<double>()});
  }
  const auto count = static_cast<int>(t.nodes.size());
  if (count == 0) throw Error(ErrorCode::FormatError, "empty tree");
  // children always follow their parent, which also rules out cycles
  for (int i = 0; i < count; ++i) {
    const auto& n = t.nodes[i];
    if (n.feature >= 0 && (n.left <= i || n.right <= i || n.left >= count || n.right >= count))
      throw Error(ErrorCode::FormatError, "tree node child index out of range");
  }
  return t;
}

Json linear_to_json(const LinearState& s) {
  return Json{{"mean", s.mean}, {"scale", s.scale}, {"weights", s.weights}, {"bias", s.bias}};
}

void linear_from_json(const Json& j, LinearState& s, std::size_t n_features) {
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  s.weights = j.at("weights").get<std::vector<double>>();
  s.bias = j.at("bias").get<double>();
  if (s.mean.size() != n_features || s.scale.size() != n_features || s.weights.size() != n_features)
    throw Error(ErrorCode::FormatError, "linear model vectors do not match n_features");
}

// Wraps nlohmann type/parse errors into FormatError.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::FormatError, std::string(what) + ": " + ex.what());
  }
}

}  // namespace

Json to_json(const ClassifierSpec& spec) {
  Json hyper = std::visit(
      overloaded{
          [](const KnnParams& p) { return Json{{"k", p.k}}; },
          [](const TreeParams& p) {
            return Json{{"max_depth", p.max_depth}, {"min_samples_split", p.min_samples_split}};
          },
          [](const ForestParams& p) {
            return Json{{"n_trees", p.n_trees},
                        {"max_features", p.max_features},
                        {"max_depth", p.max_depth},
                        {"min_samples_split", p.min_samples_split}};
          },
          [](const LogisticParams& p) {
            return Json{{"learning_rate", p.learning_rate}, {"epochs", p.epochs}, {"l2", p.l2}};
          },
          [](const SvmParams& p) { return Json{{"lambda", p.lambda}, {"epochs", p.epochs}}; },
          [](const NaiveBayesParams& p) { return Json{{"var_smoothing", p.var_smoothing}}; },
      },
      spec.hyper);
  return Json{{"kind", std::string(to_string(spec.kind()))}, {"seed", spec.seed}, {"hyperparameters", hyper}};
}

ClassifierSpec spec_from_json(const Json& j) {
  return guarded("classifier spec", [&] {
    auto spec = ClassifierSpec::defaults(kind_from_string(j.at("kind").get<std::string>()),
                                         read_or<std::uint64_t>(j, "seed", 0));
    const Json h = j.contains("hyperparameters") ? j.at("hyperparameters") : Json::object();
    std::visit(overloaded{
                   [&](KnnParams& p) { p.k = read_or(h, "k", p.k); },
                   [&](TreeParams& p) {
                     p.max_depth = read_or(h, "max_depth", p.max_depth);
                     p.min_samples_split = read_or(h, "min_samples_split", p.min_samples_split);
                   },
                   [&](ForestParams& p) {
                     p.n_trees = read_or(h, "n_trees", p.n_trees);
                     p.max_features = read_or(h, "max_features", p.max_features);
                     p.max_depth = read_or(h, "max_depth", p.max_depth);
                     p.min_samples_split = read_or(h, "min_samples_split", p.min_samples_split);
                   },
                   [&](LogisticParams& p) {
                     p.learning_rate = read_or(h, "learning_rate", p.learning_rate);
                     p.epochs = read_or(h, "epochs", p.epochs);
                     p.l2 = read_or(h, "l2", p.l2);
                   },
                   [&](SvmParams& p) {
                     p.lambda = read_or(h, "lambda", p.lambda);
                     p.epochs = read_or(h, "epochs", p.epochs);
                   },
                   [&](NaiveBayesParams& p) { p.var_smoothing = read_or(h, "var_smoothing", p.var_smoothing); },
               },
               spec.hyper);
    spec.validate();
    return spec;
  });
}

Json to_json(const Model& m) {
  Json params = std::visit(
      overloaded{
          [](const KnnState& s) {
            Json rows = Json::array();
            for (std::size_t i = 0; i < s.train_x.rows(); ++i) {
              const auto r = s.train_x.row(i);
              rows.push_back(std::vector<double>(r.begin(), r.end()));
            }
            return Json{{"train_x", rows}, {"train_y", s.train_y}};
          },
          [](const TreeState& s) { return Json{{"nodes", tree_to_json(s.tree)}}; },
          [](const ForestState& s) {
            Json trees = Json::array();
            for (const auto& t : s.trees) trees.push_back(tree_to_json(t));
            return Json{{"trees", trees}};
          },
          [](const LogisticState& s) { return linear_to_json(s); },
          [](const SvmState& s) { return linear_to_json(s); },
          [](const NaiveBayesState& s) {
            return Json{{"prior", s.prior}, {"mean", s.mean}, {"variance", s.variance}};
          },
      },
      m.state);
  return Json{{"format_version", kFormatVersion},
              {"spec", to_json(m.spec)},
              {"n_features", m.n_features},
              {"parameters", params}};
}

Model model_from_json(const Json& j) {
  return guarded("model", [&] {
    if (j.at("format_version").get<int>() != kFormatVersion)
      throw Error(ErrorCode::FormatError, "unsupported model format_version");
    Model m;
    m.spec = spec_from_json(j.at("spec"));
    m.n_features = j.at("n_features").get<std::size_t>();
    const Json& p = j.at("parameters");
    switch (m.spec.kind()) {
      case ClassifierKind::knn: {
        KnnState s;
        s.train_x = FeatureMatrix::with_columns(m.n_features);
        for (const auto& row : p.at("train_x")) s.train_x.push_row(row.get<std::vector<double>>());
        s.train_y = p.at("train_y").get<Labels>();
        if (s.train_y.size() != s.train_x.rows() || s.train_y.empty())
          throw Error(ErrorCode::FormatError, "knn training set is empty or ragged");
        m.state = std::move(s);
        break;
      }
      case ClassifierKind::decision_tree:
        m.state = TreeState{tree_from_json(p.at("nodes"))};
        break;
      case ClassifierKind::random_forest: {
        ForestState s;
        for (const auto& t : p.at("trees")) s.trees.push_back(tree_from_json(t));
        if (s.trees.empty()) throw Error(ErrorCode::FormatError, "forest without trees");
        m.state = std::move(s);
        break;
      }
      case ClassifierKind::logistic_regression: {
        LogisticState s;
        linear_from_json(p, s, m.n_features);
        m.state = std::move(s);
        break;
      }
      case ClassifierKind::svm: {
        SvmState s;
        linear_from_json(p, s, m.n_features);
        m.state = std::move(s);
        break;
      }
      case ClassifierKind::naive_bayes: {
        NaiveBayesState s;
        s.prior = p.at("prior").get<std::array<double, 2>>();
        s.mean = p.at("mean").get<std::array<std::vector<double>, 2>>();
        s.variance = p.at("variance").get<std::array<std::vector<double>, 2>>();
        m.state = std::move(s);
        break;
      }
    }
    return m;
  });
}

Json to_json(const BlendConfig& c) {
  Json bases = Json::array();
  for (const auto& s : c.base_specs) bases.push_back(to_json(s));
  return Json{{"base_specs", bases},
              {"meta_spec", to_json(c.meta_spec)},
              {"val_fraction", c.val_fraction},
              {"meta_feature_mode", std::string(to_string(c.meta_feature_mode))},
              {"seed", c.seed}};
}

BlendConfig blend_config_from_json(const Json& j) {
  return guarded("blend config", [&] {
    BlendConfig c;
    for (const auto& s : j.at("base_specs")) c.base_specs.push_back(spec_from_json(s));
    c.meta_spec = spec_from_json(j.at("meta_spec"));
    c.val_fraction = read_or(j, "val_fraction", c.val_fraction);
    c.meta_feature_mode = meta_mode_from_string(read_or<std::string>(j, "meta_feature_mode", "labels"));
    c.seed = read_or<std::uint64_t>(j, "seed", 0);
    return c;
  });
}

Json to_json(const BlendEnsemble& e) {
  Json bases = Json::array();
  for (const auto& m : e.base_models) bases.push_back(to_json(m));
  return Json{{"format_version", kFormatVersion},
              {"config", to_json(e.config)},
              {"base_models", bases},
              {"meta_model", to_json(e.meta_model)}};
}

BlendEnsemble ensemble_from_json(const Json& j) {
  return guarded("ensemble", [&] {
    if (j.at("format_version").get<int>() != kFormatVersion)
      throw Error(ErrorCode::FormatError, "unsupported ensemble format_version");
    BlendEnsemble e;
    e.config = blend_config_from_json(j.at("config"));
    for (const auto& m : j.at("base_models")) e.base_models.push_back(model_from_json(m));
    e.meta_model = model_from_json(j.at("meta_model"));
    if (e.meta_model.n_features != e.base_models.size())
      throw Error(ErrorCode::FormatError, "meta model width differs from the base model count");
    return e;
  });
}

MetricParams metric_params_from_json(const Json& j) {
  return guarded("metric params", [&] {
    MetricParams p;
    p.minkowski_p = read_or(j, "minkowski_p", p.minkowski_p);
    p.edr_epsilon = read_or(j, "edr_epsilon", p.edr_epsilon);
    p.lcss_epsilon = read_or(j, "lcss_epsilon", p.lcss_epsilon);
    p.erp_gap = read_or(j, "erp_gap", p.erp_gap);
    p.msm_cost = read_or(j, "msm_cost", p.msm_cost);
    if (j.contains("dtw_band") && !j.at("dtw_band").is_null())
      p.dtw_band = j.at("dtw_band").get<std::size_t>();
    p.validate();
    return p;
  });
}

Json to_json(const MetricParams& p) {
  Json j{{"minkowski_p", p.minkowski_p},
         {"edr_epsilon", p.edr_epsilon},
         {"lcss_epsilon", p.lcss_epsilon},
         {"erp_gap", p.erp_gap},
         {"msm_cost", p.msm_cost}};
  j["dtw_band"] = p.dtw_band ? Json(*p.dtw_band) : Json(nullptr);
  return j;
}

SmoteParams smote_params_from_json(const Json& j, SmoteParams base) {
  return guarded("smote params", [&] {
    base.n_clusters = read_or(j, "n_clusters", base.n_clusters);
    base.cluster_balance_threshold = read_or(j, "cluster_balance_threshold", base.cluster_balance_threshold);
    base.k_neighbors = read_or(j, "k_neighbors", base.k_neighbors);
    base.density_exponent = read_or(j, "density_exponent", base.density_exponent);
    base.seed = read_or(j, "seed", base.seed);
    base.validate();
    return base;
  });
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + ex.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace sylblend::io
