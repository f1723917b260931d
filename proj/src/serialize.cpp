#include "isneak/serialize.hpp"

namespace isneak {

using nlohmann::json;

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::complete: return "complete";
    case RunStatus::aborted: return "aborted";
    case RunStatus::no_valid_result: return "no_valid_result";
  }
  return "unknown";
}

namespace {

json option_json(const std::vector<AttrValue>& option, const EncodingScheme& scheme) {
  json rows = json::array();
  for (const auto& av : option) {
    rows.push_back({{"attr", scheme.attributes[av.attribute].name}, {"value", scheme.label(av)}});
  }
  return rows;
}

}  // namespace

json question_json(const Question& question, const EncodingScheme& scheme) {
  return {{"id", question.id},
          {"optionA", option_json(question.option_a, scheme)},
          {"optionB", option_json(question.option_b, scheme)}};
}

json values_json(std::span<const double> values, const CandidatePool& pool) {
  json out = json::object();
  for (std::size_t a = 0; a < values.size() && a < pool.attributes.size(); ++a) {
    const auto& attr = pool.attributes[a];
    switch (attr.kind) {
      case AttributeKind::boolean: out[attr.name] = values[a] != 0.0; break;
      case AttributeKind::numeric: out[attr.name] = values[a]; break;
      case AttributeKind::categorical:
        out[attr.name] = attr.symbols.at(static_cast<std::size_t>(values[a]));
        break;
    }
  }
  return out;
}

json result_json(const RunResult& result, const CandidatePool& pool, const EncodingScheme* scheme,
                 bool with_timing) {
  json selected = json::array();
  for (const auto& s : result.selected) {
    json goals = json::object();
    for (std::size_t j = 0; j < s.goals.size() && j < pool.spec.size(); ++j) {
      goals[pool.spec.goals[j].name] = s.goals[j];
    }
    selected.push_back({{"pool_index", s.pool_index ? json(*s.pool_index) : json(nullptr)},
                        {"valid", s.valid},
                        {"goals", goals},
                        {"values", values_json(s.values, pool)}});
  }

  json questions = json::array();
  for (const auto& step : result.log.interactions) {
    json q = scheme ? question_json(step.question, *scheme) : json{{"id", step.question.id}};
    q["answer"] = step.answer == Choice::a ? "A" : "B";
    q["support_east"] = step.support_east;
    q["support_west"] = step.support_west;
    q["pruned_half"] = step.pruned_east ? "east" : "west";
    q["pruned"] = step.pruned;
    questions.push_back(std::move(q));
  }

  json doc = {{"algorithm", result.algorithm},
              {"model", result.model},
              {"seed", result.seed},
              {"status", to_string(result.status)},
              {"interactions", result.log.count()},
              {"question_sizes", result.log.sizes},
              {"questions", questions},
              {"y_evaluations", result.log.y_evaluations},
              {"survivors", result.survivors},
              {"valid_fraction", result.valid_fraction},
              {"selected", selected},
              {"ratings", result.ratings}};
  if (!result.error.empty()) doc["error"] = result.error;
  if (with_timing) doc["timing"] = {{"wall_ms", result.wall_ms}};
  return doc;
}

}  // namespace isneak
