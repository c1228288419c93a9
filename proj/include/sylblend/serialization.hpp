#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sylblend/blend.hpp"
#include "sylblend/dataprep.hpp"
#include "sylblend/learners.hpp"
#include "sylblend/metrics.hpp"

namespace sylblend::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

Json to_json(const ClassifierSpec& spec);
ClassifierSpec spec_from_json(const Json& j);

/// {format_version, spec, n_features, parameters}
Json to_json(const Model& m);
Model model_from_json(const Json& j);

Json to_json(const BlendConfig& c);
BlendConfig blend_config_from_json(const Json& j);

/// {format_version, config, base_models, meta_model}
Json to_json(const BlendEnsemble& e);
BlendEnsemble ensemble_from_json(const Json& j);

/// Missing keys keep their defaults.
MetricParams metric_params_from_json(const Json& j);
Json to_json(const MetricParams& p);
SmoteParams smote_params_from_json(const Json& j, SmoteParams base = {});

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sylblend::io
