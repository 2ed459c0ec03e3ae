#pragma once

// Serialized run results, sweep tables, and SVG drawings of reachable tubes.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carv/harness.hpp"

namespace carv {

inline constexpr const char* kToolVersion = "0.1.0";

struct Timing {
    double load_seconds = 0.0;
    double verify_seconds = 0.0;
    double mc_seconds = 0.0;
    double total_seconds = 0.0;
};

struct RunOutput {
    std::string tool_version = kToolVersion;
    std::string scenario_digest;
    std::string method;
    nlohmann::json scenario;  // scenario echo, as written by scenario_to_json
    VerificationResult result;
    std::optional<SoundnessReport> soundness;
    Timing timing;
};

// FNV-1a 64 of the given bytes, as "fnv1a64:<16 hex digits>".
std::string digest_bytes(const std::string& bytes);

nlohmann::json result_to_json(const VerificationResult& r);
VerificationResult result_from_json(const nlohmann::json& j);

nlohmann::json soundness_to_json(const SoundnessReport& rep);

nlohmann::json run_output_to_json(const RunOutput& out);
RunOutput run_output_from_json(const nlohmann::json& j);

// Header: parameter,method,verified,seconds,concrete_calls,symbolic_calls
std::string sweep_csv(const std::vector<SweepRecord>& records);

// Draws the projection of every RSOA onto state coordinates (i, j), the
// constraints that live in that plane, and optional trajectory samples.
// Output bytes depend only on the inputs.
std::string render_svg(const RunOutput& out, std::size_t i, std::size_t j,
                       const std::vector<std::vector<Vec>>& trajectories = {});

}  // namespace carv
