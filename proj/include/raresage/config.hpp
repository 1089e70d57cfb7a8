#pragma once

#include <filesystem>
#include <iosfwd>

#include "raresage/pipeline.hpp"

namespace raresage {

/// INI text. Pipeline keys may sit at top level or under [pipeline]:
///   k, multiplier, t_c, metric, dl_roster, k_roster, max_stages, seed,
///   embedding_columns, knowledge_columns, validation_fraction
/// Rosters are comma lists of machine kinds; columns use parse_column_list.
/// A [train] section sets TrainConfig fields (logistic_epochs, logistic_rate,
/// logistic_l2, svm_epochs, svm_lambda, svm_eta0, balanced, temperature,
/// feature_map). Unknown keys are a ConfigError.
PipelineConfig parse_pipeline_config(std::istream& in, PipelineConfig base = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path, PipelineConfig base = {});

}  // namespace raresage
