#pragma once

#include <string>

#include "json.hpp"

#include "ekb/aggregate.hpp"
#include "ekb/embedding.hpp"
#include "ekb/ensemble.hpp"

namespace ekb {

using json = nlohmann::json;

[[nodiscard]] json to_json(const EmbeddingConfig& cfg);
[[nodiscard]] json to_json(const TrainConfig& cfg);
[[nodiscard]] json to_json(const FitReport& report);
[[nodiscard]] json to_json(const Embedding& e);
[[nodiscard]] json to_json(const Ensemble& ens);
[[nodiscard]] json to_json(const AggregateModel& agg);

[[nodiscard]] EmbeddingConfig embedding_config_from_json(const json& j);
[[nodiscard]] TrainConfig train_config_from_json(const json& j);
[[nodiscard]] FitReport fit_report_from_json(const json& j);
[[nodiscard]] Embedding embedding_from_json(const json& j);
[[nodiscard]] Ensemble ensemble_from_json(const json& j);

/// Pretty-printed JSON with a trailing newline. Output is a pure function
/// of the value: object keys are sorted and doubles round-trip exactly.
[[nodiscard]] std::string dump(const json& j);

void write_text(const std::string& path, const std::string& text);
[[nodiscard]] std::string read_text(const std::string& path);

void save_ensemble(const Ensemble& ens, const std::string& path);
[[nodiscard]] Ensemble load_ensemble(const std::string& path);

/// One `term member_index x1 ... xN` row per cloud point.
[[nodiscard]] std::string format_clouds(const AggregateModel& agg);

}  // namespace ekb
