#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "csv.hpp"
#include "isneak/error.hpp"
#include "isneak/model.hpp"
#include "isneak/sat.hpp"

namespace isneak {
namespace {

std::string at_line(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

bool parse_long(std::string_view token, long& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_number(const std::string& token, double& out) {
  const std::string t = csv::trim(token);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(out);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

}  // namespace

void CnfModel::validate() const {
  require(num_vars > 0, "model must declare at least one variable");
  require(var_names.size() == num_vars, "var_names length must equal num_vars");
  std::unordered_set<std::string> names;
  for (const auto& n : var_names) {
    require(!n.empty(), "variable names must be nonempty");
    require(names.insert(n).second, "variable names must be unique");
  }
  for (const auto& clause : clauses) {
    require(!clause.empty(), "clauses must be nonempty");
    for (int lit : clause) {
      require(lit != 0 && static_cast<std::size_t>(std::abs(lit)) <= num_vars,
              "literal out of range");
    }
  }
}

CnfModel parse_dimacs(std::string_view text, std::string name) {
  CnfModel model;
  model.name = std::move(name);
  bool have_header = false;
  long declared_clauses = 0;
  std::vector<std::pair<std::size_t, std::string>> names;
  std::vector<int> current;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    if (tokens[0] == "c") {
      if (tokens.size() >= 4 && tokens[1] == "var") {
        long index = 0;
        if (!parse_long(tokens[2], index) || index <= 0) {
          throw Error(ErrorCode::parse, at_line(line_no, "bad variable index in name line"));
        }
        // Names may contain spaces; take the remainder of the line.
        const auto name_start = line.find(tokens[3]);
        names.emplace_back(static_cast<std::size_t>(index), csv::trim(line.substr(name_start)));
      }
      continue;
    }
    if (tokens[0] == "%") break;  // SATLIB trailer
    if (tokens[0] == "p") {
      long vars = 0;
      if (have_header || tokens.size() != 4 || tokens[1] != "cnf" ||
          !parse_long(tokens[2], vars) || !parse_long(tokens[3], declared_clauses) || vars <= 0 ||
          declared_clauses < 0) {
        throw Error(ErrorCode::parse, at_line(line_no, "malformed problem line"));
      }
      model.num_vars = static_cast<std::size_t>(vars);
      have_header = true;
      continue;
    }
    if (!have_header) {
      throw Error(ErrorCode::parse, at_line(line_no, "clause before problem line"));
    }
    for (auto token : tokens) {
      long lit = 0;
      if (!parse_long(token, lit)) {
        throw Error(ErrorCode::parse, at_line(line_no, "bad literal '" + std::string(token) + "'"));
      }
      if (lit == 0) {
        if (current.empty()) throw Error(ErrorCode::parse, at_line(line_no, "empty clause"));
        model.clauses.push_back(std::move(current));
        current.clear();
        continue;
      }
      if (static_cast<std::size_t>(std::labs(lit)) > model.num_vars) {
        throw Error(ErrorCode::parse,
                    at_line(line_no, "literal " + std::to_string(lit) + " out of range"));
      }
      current.push_back(static_cast<int>(lit));
    }
  }
  if (!have_header) throw Error(ErrorCode::parse, "missing problem line");
  if (!current.empty()) model.clauses.push_back(std::move(current));
  if (static_cast<long>(model.clauses.size()) != declared_clauses) {
    throw Error(ErrorCode::parse, "clause count mismatch: declared " +
                                      std::to_string(declared_clauses) + ", found " +
                                      std::to_string(model.clauses.size()));
  }

  model.var_names.resize(model.num_vars);
  for (std::size_t v = 0; v < model.num_vars; ++v) model.var_names[v] = "x" + std::to_string(v + 1);
  for (auto& [index, n] : names) {
    if (index > model.num_vars) throw Error(ErrorCode::parse, "named variable out of range");
    model.var_names[index - 1] = std::move(n);
  }
  model.validate();
  return model;
}

std::string write_dimacs(const CnfModel& model) {
  std::ostringstream out;
  if (!model.name.empty()) out << "c model " << model.name << "\n";
  for (std::size_t v = 0; v < model.num_vars; ++v) {
    out << "c var " << (v + 1) << " " << model.var_names[v] << "\n";
  }
  out << "p cnf " << model.num_vars << " " << model.clauses.size() << "\n";
  for (const auto& clause : model.clauses) {
    for (int lit : clause) out << lit << " ";
    out << "0\n";
  }
  return out.str();
}

bool check_validity(const CnfModel& model, std::span<const std::uint8_t> bits) {
  require(bits.size() == model.num_vars, "assignment length must equal num_vars");
  for (const auto& clause : model.clauses) {
    bool satisfied = false;
    for (int lit : clause) {
      const bool value = bits[static_cast<std::size_t>(std::abs(lit)) - 1] != 0;
      if ((lit > 0) == value) {
        satisfied = true;
        break;
      }
    }
    if (!satisfied) return false;
  }
  return true;
}

// --- objectives ------------------------------------------------------------

std::vector<double> ObjectiveSpec::weights() const {
  std::vector<double> w;
  w.reserve(goals.size());
  for (const auto& g : goals) w.push_back(g.weight());
  return w;
}

std::size_t ObjectiveSpec::index_of(std::string_view goal) const {
  for (std::size_t j = 0; j < goals.size(); ++j) {
    if (goals[j].name == goal) return j;
  }
  return static_cast<std::size_t>(-1);
}

void ObjectiveSpec::validate() const {
  require(!goals.empty(), "at least one goal is required");
  std::unordered_set<std::string> names;
  for (const auto& g : goals) {
    require(!g.name.empty(), "goal names must be nonempty");
    require(names.insert(g.name).second, "goal names must be unique");
  }
  for (const auto& row : per_feature_values) {
    require(row.size() == goals.size(), "per-feature row width must equal goal count");
  }
}

ObjectiveSpec parse_objectives_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("objectives json: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("objectives") || !doc["objectives"].is_array()) {
    throw Error(ErrorCode::schema, "objectives json: missing 'objectives' array");
  }
  ObjectiveSpec spec;
  for (const auto& item : doc["objectives"]) {
    if (!item.is_object() || !item.contains("column") || !item["column"].is_string() ||
        !item.contains("goal") || !item["goal"].is_string()) {
      throw Error(ErrorCode::schema, "objectives json: entries need 'column' and 'goal' strings");
    }
    const std::string goal = item["goal"].get<std::string>();
    Direction dir;
    if (goal == "minimize" || goal == "min") {
      dir = Direction::minimize;
    } else if (goal == "maximize" || goal == "max") {
      dir = Direction::maximize;
    } else {
      throw Error(ErrorCode::schema, "objectives json: goal must be minimize or maximize");
    }
    spec.goals.push_back({item["column"].get<std::string>(), dir});
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::schema, std::string("objectives json: ") + e.what());
  }
  return spec;
}

std::string objectives_json(const ObjectiveSpec& spec) {
  nlohmann::json doc;
  doc["objectives"] = nlohmann::json::array();
  for (const auto& g : spec.goals) {
    doc["objectives"].push_back(
        {{"column", g.name},
         {"goal", g.direction == Direction::maximize ? "maximize" : "minimize"}});
  }
  return doc.dump(2) + "\n";
}

void load_feature_values(ObjectiveSpec& spec, std::string_view csv_text, const CnfModel& model) {
  const auto rows = csv::parse(csv_text);
  if (rows.empty()) throw Error(ErrorCode::schema, "feature table: missing header");
  const auto& header = rows[0];
  if (header.empty() || csv::trim(header[0]) != "feature") {
    throw Error(ErrorCode::schema, "feature table: first column must be 'feature'");
  }
  std::vector<std::size_t> column_of(spec.size(), 0);
  for (std::size_t j = 0; j < spec.size(); ++j) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return csv::trim(h) == spec.goals[j].name; });
    if (it == header.end()) {
      throw Error(ErrorCode::schema, "feature table: missing goal column '" + spec.goals[j].name + "'");
    }
    column_of[j] = static_cast<std::size_t>(it - header.begin());
  }
  std::unordered_map<std::string, std::size_t> var_index;
  for (std::size_t v = 0; v < model.num_vars; ++v) var_index[model.var_names[v]] = v;

  spec.per_feature_values.assign(model.num_vars, std::vector<double>(spec.size(), 0.0));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto it = var_index.find(csv::trim(row[0]));
    if (it == var_index.end()) {
      throw Error(ErrorCode::schema, "feature table row " + std::to_string(r) +
                                         ": unknown feature '" + row[0] + "'");
    }
    for (std::size_t j = 0; j < spec.size(); ++j) {
      double value = 0.0;
      if (column_of[j] >= row.size() || !parse_number(row[column_of[j]], value)) {
        throw Error(ErrorCode::parse,
                    "feature table row " + std::to_string(r) + ": non-numeric goal value");
      }
      spec.per_feature_values[it->second][j] = value;
    }
  }
}

std::string feature_values_csv(const ObjectiveSpec& spec, const CnfModel& model) {
  require(spec.per_feature_values.size() == model.num_vars, "feature table size mismatch");
  std::ostringstream out;
  out << "feature";
  for (const auto& g : spec.goals) out << "," << csv::quote(g.name);
  out << "\n";
  char buf[64];
  for (std::size_t v = 0; v < model.num_vars; ++v) {
    out << csv::quote(model.var_names[v]);
    for (double x : spec.per_feature_values[v]) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << "," << buf;
    }
    out << "\n";
  }
  return out.str();
}

GoalVector evaluate_goals(std::span<const std::uint8_t> bits, const ObjectiveSpec& spec) {
  if (spec.per_feature_values.empty()) {
    throw Error(ErrorCode::unsupported,
                "no per-feature value table; this pool's goals must come from CSV columns");
  }
  require(bits.size() == spec.per_feature_values.size(), "assignment length mismatch");
  GoalVector goals(spec.size(), 0.0);
  for (std::size_t v = 0; v < bits.size(); ++v) {
    if (!bits[v]) continue;
    for (std::size_t j = 0; j < goals.size(); ++j) goals[j] += spec.per_feature_values[v][j];
  }
  return goals;
}

// --- pools -----------------------------------------------------------------

bool CandidatePool::has_goals() const {
  return !candidates.empty() &&
         std::all_of(candidates.begin(), candidates.end(),
                     [&](const Candidate& c) { return c.goals.size() == spec.size(); });
}

void CandidatePool::compute_goal_bounds() {
  goal_bounds.clear();
  if (!has_goals()) return;
  goal_bounds.assign(spec.size(), {std::numeric_limits<double>::infinity(),
                                   -std::numeric_limits<double>::infinity()});
  for (const auto& c : candidates) {
    for (std::size_t j = 0; j < spec.size(); ++j) {
      goal_bounds[j].min = std::min(goal_bounds[j].min, c.goals[j]);
      goal_bounds[j].max = std::max(goal_bounds[j].max, c.goals[j]);
    }
  }
}

Bits CandidatePool::bits(std::size_t index) const {
  const auto& values = candidates.at(index).values;
  Bits out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] != 0.0 ? 1 : 0;
  return out;
}

CandidatePool enumerate_valid(std::shared_ptr<const CnfModel> model, const ObjectiveSpec& spec,
                              std::size_t count, std::uint64_t seed) {
  require(model != nullptr, "model is required");
  require(count >= 1, "count must be at least 1");
  model->validate();

  CandidatePool pool;
  pool.name = model->name;
  pool.model = model;
  pool.spec = spec;
  for (const auto& n : model->var_names) pool.attributes.push_back({n, AttributeKind::boolean, {}});

  auto solver = make_sat_backend(model->num_vars);
  for (const auto& clause : model->clauses) solver->add_clause(clause);
  Rng rng(seed);
  std::vector<int> decisions;
  std::vector<int> blocking;
  const bool with_goals = !spec.per_feature_values.empty();
  while (pool.candidates.size() < count) {
    auto assignment = solver->solve(rng, &decisions);
    if (!assignment) break;
    Candidate c;
    c.values.assign(assignment->begin(), assignment->end());
    c.valid = check_validity(*model, *assignment);
    if (with_goals) c.goals = evaluate_goals(*assignment, spec);
    pool.candidates.push_back(std::move(c));
    if (decisions.empty()) break;  // the model has exactly this solution left
    // Under these decisions propagation fixes every other variable, so
    // negating the decisions blocks exactly this assignment.
    blocking.clear();
    for (int lit : decisions) blocking.push_back(-lit);
    solver->add_clause(blocking);
  }
  if (pool.candidates.empty()) {
    const std::string label = model->name.empty() ? std::string("<unnamed>") : model->name;
    throw Error(ErrorCode::empty_pool, "model '" + label + "' is unsatisfiable");
  }
  pool.compute_goal_bounds();
  return pool;
}

CandidatePool load_candidate_table(std::string_view csv_text, const ObjectiveSpec& spec,
                                   std::string name) {
  spec.validate();
  const auto rows = csv::parse(csv_text);
  if (rows.empty()) throw Error(ErrorCode::schema, "candidate table: missing header row");
  std::vector<std::string> header;
  for (const auto& h : rows[0]) header.push_back(csv::trim(h));

  std::vector<std::size_t> goal_col(spec.size());
  for (std::size_t j = 0; j < spec.size(); ++j) {
    auto it = std::find(header.begin(), header.end(), spec.goals[j].name);
    if (it == header.end()) {
      throw Error(ErrorCode::schema, "candidate table: missing goal column '" + spec.goals[j].name + "'");
    }
    goal_col[j] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::size_t> attr_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (std::find(goal_col.begin(), goal_col.end(), c) == goal_col.end()) attr_col.push_back(c);
  }

  CandidatePool pool;
  pool.name = std::move(name);
  pool.spec = spec;
  pool.spec.per_feature_values.clear();

  // Column typing: all {0,1,true,false} -> boolean, all numeric -> numeric,
  // otherwise categorical.
  const std::size_t n_rows = rows.size() - 1;
  for (std::size_t a : attr_col) {
    Attribute attr{header[a], AttributeKind::boolean, {}};
    bool all_bool = true;
    bool all_num = true;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const std::string cell = a < rows[r].size() ? csv::trim(rows[r][a]) : std::string();
      double v = 0;
      if (!(cell == "0" || cell == "1" || cell == "true" || cell == "false" || cell == "True" ||
            cell == "False")) {
        all_bool = false;
      }
      if (!parse_number(cell, v)) all_num = false;
    }
    attr.kind = all_bool ? AttributeKind::boolean
                         : (all_num ? AttributeKind::numeric : AttributeKind::categorical);
    pool.attributes.push_back(std::move(attr));
  }
  std::vector<std::unordered_map<std::string, std::size_t>> symbol_index(attr_col.size());

  pool.candidates.reserve(n_rows);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    Candidate c;
    c.valid = true;
    c.goals.resize(spec.size());
    for (std::size_t j = 0; j < spec.size(); ++j) {
      if (goal_col[j] >= row.size() || !parse_number(row[goal_col[j]], c.goals[j])) {
        throw Error(ErrorCode::parse, "candidate table row " + std::to_string(r) +
                                          ": non-numeric value in goal column '" +
                                          spec.goals[j].name + "'");
      }
    }
    for (std::size_t k = 0; k < attr_col.size(); ++k) {
      const std::string cell =
          attr_col[k] < row.size() ? csv::trim(row[attr_col[k]]) : std::string();
      auto& attr = pool.attributes[k];
      double v = 0;
      switch (attr.kind) {
        case AttributeKind::boolean:
          v = (cell == "1" || cell == "true" || cell == "True") ? 1.0 : 0.0;
          break;
        case AttributeKind::numeric:
          parse_number(cell, v);
          break;
        case AttributeKind::categorical: {
          auto [it, inserted] = symbol_index[k].try_emplace(cell, attr.symbols.size());
          if (inserted) attr.symbols.push_back(cell);
          v = static_cast<double>(it->second);
          break;
        }
      }
      c.values.push_back(v);
    }
    pool.candidates.push_back(std::move(c));
  }
  pool.compute_goal_bounds();
  return pool;
}

std::string write_candidate_table(const CandidatePool& pool) {
  std::ostringstream out;
  bool first = true;
  for (const auto& a : pool.attributes) {
    out << (first ? "" : ",") << csv::quote(a.name);
    first = false;
  }
  const bool goals = pool.has_goals();
  if (goals) {
    for (const auto& g : pool.spec.goals) {
      out << (first ? "" : ",") << csv::quote(g.name);
      first = false;
    }
  }
  out << "\n";
  char buf[64];
  for (const auto& c : pool.candidates) {
    for (std::size_t k = 0; k < c.values.size(); ++k) {
      if (k) out << ",";
      const auto& attr = pool.attributes[k];
      if (attr.kind == AttributeKind::categorical) {
        out << csv::quote(attr.symbols[static_cast<std::size_t>(c.values[k])]);
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", c.values[k]);
        out << buf;
      }
    }
    if (goals) {
      for (double g : c.goals) {
        std::snprintf(buf, sizeof buf, "%.17g", g);
        out << "," << buf;
      }
    }
    out << "\n";
  }
  return out.str();
}

// --- evaluation accounting -------------------------------------------------

Evaluator::Evaluator(const CandidatePool& pool) : pool_(pool), seen_(pool.size(), 0) {}

const GoalVector& Evaluator::evaluate(std::size_t index) {
  require(index < pool_.size(), "candidate index out of range");
  const auto& goals = pool_.candidates[index].goals;
  if (goals.size() != pool_.spec.size()) {
    throw Error(ErrorCode::unsupported, "pool candidate has no goal values");
  }
  if (!seen_[index]) {
    seen_[index] = 1;
    count_.fetch_add(1);
  }
  return goals;
}

GoalVector Evaluator::evaluate_bits(std::span<const std::uint8_t> bits) {
  GoalVector goals = evaluate_goals(bits, pool_.spec);
  count_.fetch_add(1);
  return goals;
}

}  // namespace isneak
