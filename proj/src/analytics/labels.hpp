#pragma once

#include <map>
#include <string>
#include <vector>

namespace iothp::analytics {

// One labeling rule: a substring or whole-token pattern mapped to an
// objective such as "System Intelligence".
struct ObjectiveRule {
    std::string pattern;
    bool token_match = false;  // false: substring match
    std::string objective;
};

// Rules file: JSON array of {"pattern": ..., "match": "substring"|"token",
// "objective": ...}. Throws IoError / ParseError.
std::vector<ObjectiveRule> load_objective_rules(const std::string& path);

// Objectives triggered by one command, deduplicated, in rule order.
std::vector<std::string> command_objectives(const std::string& command,
                                            const std::vector<ObjectiveRule>& rules);

inline constexpr const char* kUnlabeled = "Unlabeled";

// Hard cluster assignment over a deduplicated corpus, plus per-cluster
// objective labels.
struct ClusterAssignment {
    int k = 0;
    std::vector<std::string> commands;  // corpus, first-seen order
    std::vector<int> cluster_of;        // parallel to commands, values in [0, k)
    std::map<int, std::vector<std::string>> cluster_objectives;

    int cluster_for(const std::string& command) const;  // -1 when absent
};

// A cluster's objective set is the union of labels its member commands
// trigger; clusters that trigger nothing get "Unlabeled".
void label_clusters(ClusterAssignment& assignment, const std::vector<ObjectiveRule>& rules);

// JSON-lines persistence: {"command":..., "cluster":..., "objectives":[...]}.
void write_assignment(const std::string& path, const ClusterAssignment& assignment);
ClusterAssignment read_assignment(const std::string& path);

}  // namespace iothp::analytics
