#include "marx/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "marx/error.hpp"

namespace marx {
namespace {

[[noreturn]] void malformed(const std::string& message) {
  throw Error(ErrorCode::MalformedFile, "config", message);
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

Cell cell_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) malformed("cell must be [x, y]");
  return Cell{j[0].get<int>(), j[1].get<int>()};
}

PolicyOracle::Distribution distribution_from_json(const Json& j, const Environment& env) {
  PolicyOracle::Distribution d;
  for (const Json& entry : j) {
    d.emplace_back(env.parse_action_key(entry.at("action").get<std::string>()), entry.at("p").get<double>());
  }
  if (d.empty()) malformed("action distribution must not be empty");
  return d;
}

Json distribution_to_json(const PolicyOracle::Distribution& d, const Environment& env) {
  Json out = Json::array();
  for (const auto& [action, p] : d) out.push_back({{"action", env.action_key(action)}, {"p", p}});
  return out;
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(std::min(byte, text.size())), '\n'));
    std::size_t lineStart = text.rfind('\n', byte == 0 ? 0 : byte - 1);
    std::size_t column = lineStart == std::string::npos ? byte + 1 : byte - lineStart;
    throw Error(ErrorCode::MalformedFile, "config",
                what + ": syntax error at line " + std::to_string(line) + ", column " +
                    std::to_string(column) + " (byte " + std::to_string(byte) + ")",
                byte);
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) malformed("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "config", "cannot write " + path.string());
  out << text;
}

EnvConfig env_config_from_json(const Json& j) {
  try {
    EnvConfig c;
    std::string kind = get_or<std::string>(j, "kind", "search_rescue");
    if (kind == "search_rescue") {
      c.kind = EnvKind::SearchRescue;
    } else if (kind == "pressure_plate") {
      c.kind = EnvKind::PressurePlate;
    } else {
      malformed("unknown environment kind '" + kind + "'");
    }
    c.numAgents = j.at("numAgents").get<int>();
    c.gridWidth = j.at("grid").at("w").get<int>();
    c.gridHeight = j.at("grid").at("h").get<int>();
    c.maxEpisodeSteps = get_or<int>(j, "maxEpisodeSteps", 10000);
    c.agentNoun = get_or<std::string>(j, "agentNoun", "agent");
    for (const Json& t : j.at("tasks")) {
      TaskSpec spec;
      spec.name = t.at("name").get<std::string>();
      spec.location = cell_from_json(t.at("cell"));
      spec.requiredCoalitionSize = get_or<int>(t, "coalition", 1);
      spec.verb = get_or<std::string>(t, "verb", "");
      spec.gerund = get_or<std::string>(t, "gerund", "");
      c.tasks.push_back(std::move(spec));
    }
    for (const Json& s : j.at("agentsStart")) c.agentsStart.push_back(cell_from_json(s));
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    malformed(std::string("environment config: ") + e.what());
  }
}

Json env_config_to_json(const EnvConfig& c) {
  Json tasks = Json::array();
  for (const TaskSpec& t : c.tasks) {
    Json task = {{"name", t.name}, {"cell", {t.location.x, t.location.y}}, {"coalition", t.requiredCoalitionSize}};
    if (!t.verb.empty()) task["verb"] = t.verb;
    if (!t.gerund.empty()) task["gerund"] = t.gerund;
    tasks.push_back(std::move(task));
  }
  Json starts = Json::array();
  for (const Cell& s : c.agentsStart) starts.push_back({s.x, s.y});
  return Json{{"kind", c.kind == EnvKind::PressurePlate ? "pressure_plate" : "search_rescue"},
              {"numAgents", c.numAgents},
              {"grid", {{"w", c.gridWidth}, {"h", c.gridHeight}}},
              {"maxEpisodeSteps", c.maxEpisodeSteps},
              {"agentNoun", c.agentNoun},
              {"tasks", std::move(tasks)},
              {"agentsStart", std::move(starts)}};
}

EnvConfig load_env_config(const std::filesystem::path& path) {
  return env_config_from_json(read_json_file(path));
}

std::unique_ptr<PolicyOracle> policy_from_json(const Json& j, const Environment& env) {
  const EnvConfig& config = env.config();
  try {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "scripted") {
      std::vector<std::vector<TaskId>> scripts;
      for (const Json& script : j.at("scripts")) {
        std::vector<TaskId> ids;
        for (const Json& name : script) {
          auto g = config.task_index(name.get<std::string>());
          if (!g) malformed("script names unknown task '" + name.get<std::string>() + "'");
          ids.push_back(*g);
        }
        scripts.push_back(std::move(ids));
      }
      return std::make_unique<ScriptedPolicy>(config, std::move(scripts), get_or<double>(j, "epsilon", 0.0));
    }
    if (kind == "tabular") {
      std::unordered_map<std::string, PolicyOracle::Distribution> table;
      for (const Json& entry : j.at("table")) {
        table.emplace(entry.at("state").get<std::string>(), distribution_from_json(entry.at("actions"), env));
      }
      PolicyOracle::Distribution fallback;
      if (j.contains("fallback")) {
        fallback = distribution_from_json(j.at("fallback"), env);
      } else {
        JointAction idle;
        idle.perAgent.assign(static_cast<std::size_t>(config.numAgents), 0);
        fallback.emplace_back(idle, 1.0);
      }
      return std::make_unique<TabularPolicy>(std::move(table), std::move(fallback));
    }
    malformed("unknown policy kind '" + kind + "'");
  } catch (const Json::exception& e) {
    malformed(std::string("policy: ") + e.what());
  }
}

Json policy_to_json(const ScriptedPolicy& policy, const EnvConfig& config) {
  Json scripts = Json::array();
  for (const auto& script : policy.scripts()) {
    Json names = Json::array();
    for (TaskId g : script) names.push_back(config.tasks[static_cast<std::size_t>(g)].name);
    scripts.push_back(std::move(names));
  }
  return Json{{"kind", "scripted"}, {"epsilon", policy.epsilon()}, {"scripts", std::move(scripts)}};
}

Json policy_to_json(const TabularPolicy& policy, const Environment& env) {
  std::map<std::string, const PolicyOracle::Distribution*> sorted;
  for (const auto& [key, d] : policy.table()) sorted.emplace(key, &d);
  Json table = Json::array();
  for (const auto& [key, d] : sorted) table.push_back({{"state", key}, {"actions", distribution_to_json(*d, env)}});
  return Json{{"kind", "tabular"}, {"fallback", distribution_to_json(policy.fallback(), env)}, {"table", std::move(table)}};
}

std::unique_ptr<PolicyOracle> load_policy(const std::filesystem::path& path, const Environment& env) {
  return policy_from_json(read_json_file(path), env);
}

}  // namespace marx
