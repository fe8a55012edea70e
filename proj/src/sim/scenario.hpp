#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace iothp::sim {

struct Credential {
    std::string username;
    std::string password;
};

// One scripted action. Shell families put the command line in `command`;
// camera families put "METHOD target" there, plus optional headers and body.
struct ScriptStep {
    std::string command;
    std::string intent;  // goal vocabulary label, empty when none
    std::map<std::string, std::string> headers;
    std::string body;
};

enum class Target { Shell, Camera };

// A bot family: the credentials it tries in order and the script it runs
// once logged in. ${jit} inside a command expands to a per-actor random hex
// token, so actors of one family stay near each other in token space without
// being byte-identical.
struct BotScript {
    std::string family;
    Target target = Target::Shell;
    int actors = 0;
    std::vector<Credential> credentials;
    std::vector<ScriptStep> steps;
    int delay_min_ms = 0;
    int delay_max_ms = 0;
};

struct ScenarioConfig {
    std::string name;
    std::vector<BotScript> families;
    size_t min_actors = 3;     // pattern support threshold
    size_t min_clusters = 10;  // pattern size threshold
};

// Loads and validates a scenario file. Throws IoError / ParseError /
// ValidationError.
ScenarioConfig load_scenario(const std::string& path);

// Deterministic synthetic source address for actor a of family f (both
// zero-based). Benchmark address space, never routed.
std::string actor_ip(size_t family_index, size_t actor_index);

// The fully expanded per-actor plan: jitter placeholders resolved and one
// delay per step drawn. Expansion depends only on (config, seed, actor), so
// the manifest below can be computed without touching the network.
struct ActorPlan {
    std::string ip;
    std::string family;
    Target target = Target::Shell;
    std::vector<ScriptStep> steps;   // commands are post-expansion
    std::vector<int> delays_ms;      // parallel to steps
};

ActorPlan expand_actor(const ScenarioConfig& config, size_t family_index, size_t actor_index,
                       uint64_t seed);

struct ExpectedPattern {
    std::vector<std::string> commands;    // sorted
    std::vector<std::string> supporters;  // sorted actor ips
};

// Ground truth for a scenario run. Fully determined by (config, seed); the
// runner only adds error notes when connections fail.
struct ScenarioManifest {
    std::string scenario;
    uint64_t seed = 0;
    bool complete = true;
    std::vector<std::string> errors;
    std::vector<std::pair<std::string, std::string>> actors;  // ip -> family, config order
    // family -> sorted distinct expanded shell commands (shell families only)
    std::map<std::string, std::vector<std::string>> family_commands;
    // family -> "METHOD target" probe list in script order (camera families)
    std::map<std::string, std::vector<std::string>> family_requests;
    // family -> expected attack_type labels, sorted distinct (camera families)
    std::map<std::string, std::vector<std::string>> family_attack_types;
    // family -> expected goal sequence: first-occurrence order of step intents
    std::map<std::string, std::vector<std::string>> family_goals;
    // Patterns realizable under exact-match clustering of the emitted shell
    // commands, mined at the scenario thresholds.
    std::vector<ExpectedPattern> expected_patterns;
    size_t min_actors = 3;
    size_t min_clusters = 10;
};

ScenarioManifest build_manifest(const ScenarioConfig& config, uint64_t seed);

void write_manifest(const std::string& path, const ScenarioManifest& manifest);
ScenarioManifest read_manifest(const std::string& path);

}  // namespace iothp::sim
