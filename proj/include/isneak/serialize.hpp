#pragma once

#include <json.hpp>

#include "isneak/engine.hpp"
#include "isneak/geometry.hpp"
#include "isneak/model.hpp"
#include "isneak/preprocess.hpp"
#include "isneak/ranking.hpp"

namespace isneak {

const char* to_string(RunStatus status);

/// {"id", "optionA":[{"attr","value"}], "optionB":[...]} with human labels.
nlohmann::json question_json(const Question& question, const EncodingScheme& scheme);

/// Raw attribute values keyed by attribute name.
nlohmann::json values_json(std::span<const double> values, const CandidatePool& pool);

/// Result document. Timing lives under "timing" alone, so dropping that key
/// leaves a document that is identical across runs with the same inputs.
nlohmann::json result_json(const RunResult& result, const CandidatePool& pool,
                           const EncodingScheme* scheme, bool with_timing = true);

}  // namespace isneak
