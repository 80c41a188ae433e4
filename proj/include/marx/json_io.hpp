#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "json.hpp"
#include "marx/envsim.hpp"

namespace marx {

using Json = nlohmann::json;

/// Parses a JSON document, converting syntax errors into
/// Error(MalformedFile) with line/column diagnostics.
Json parse_json_text(const std::string& text, const std::string& what);
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Schema: {numAgents, grid:{w,h}, tasks:[{name, cell:[x,y], coalition,
/// verb?, gerund?}], agentsStart:[[x,y],...], kind?, maxEpisodeSteps?,
/// agentNoun?}
EnvConfig env_config_from_json(const Json& j);
Json env_config_to_json(const EnvConfig& c);
EnvConfig load_env_config(const std::filesystem::path& path);

/// {"kind":"scripted","epsilon":e,"scripts":[[task,...],...]} or
/// {"kind":"tabular","fallback":[{action,p}],"table":[{state,actions:[{action,p}]}]}
std::unique_ptr<PolicyOracle> policy_from_json(const Json& j, const Environment& env);
Json policy_to_json(const ScriptedPolicy& policy, const EnvConfig& config);
Json policy_to_json(const TabularPolicy& policy, const Environment& env);
std::unique_ptr<PolicyOracle> load_policy(const std::filesystem::path& path, const Environment& env);

}  // namespace marx
