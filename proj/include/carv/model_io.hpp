#pragma once

// JSON weights and scenario files.
//
// weights:  {"format_version":1,"input_dim":N,
//            "layers":[{"weights":[[...]],"bias":[...],"activation":"relu"|"linear"}]}
// scenario: {"dynamics":{"kind":"double_integrator"|"unicycle","dt":f,"v":f?},
//            "policy":"path","x0":{"lower":[...],"upper":[...]},
//            "constraints":[{"type":"halfspace","normal":[...],"offset":f}
//                          |{"type":"disk_avoid","center":[f,f],"radius":f,"coords":[i,j]}],
//            "t_f":n,"k_max":n,"mc":{"n":n,"seed":n}?}
// Relative policy paths resolve against the scenario file's directory.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "carv/reach.hpp"

namespace carv {

Network network_from_json(const nlohmann::json& j);
nlohmann::json network_to_json(const Network& net);

Network load_network(const std::filesystem::path& path);
void save_network(const Network& net, const std::filesystem::path& path);

ConstraintSet constraints_from_json(const nlohmann::json& j);
nlohmann::json constraints_to_json(const ConstraintSet& c);

Box box_from_json(const nlohmann::json& j);
nlohmann::json box_to_json(const Box& b);

// The policy is loaded from scenario["policy"] resolved against base_dir.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json scenario_to_json(const Scenario& s);

Scenario load_scenario(const std::filesystem::path& path);
// Writes the scenario file only; the policy file referenced by policy_path is not touched.
void save_scenario(const Scenario& s, const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path, const char* what);
// Writes via a temporary file and rename so readers never see partial output.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace carv
