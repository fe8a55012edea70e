#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "analytics/labels.hpp"
#include "grouping/patterns.hpp"

namespace iothp::grouping {

// Maps cluster objectives onto the goal vocabulary with a static ordering
// rank (intelligence-type goals rank before action-type goals).
struct GoalRules {
    struct Entry {
        std::string goal;
        int rank = 0;
    };
    std::map<std::string, Entry> by_objective;
    std::string default_goal = "Miscellaneous";
    int default_rank = 90;
};

GoalRules load_goal_rules(const std::string& path);

// Mean first-position of each goal inside single sessions. When every goal of
// a pattern has a hint, the temporal order overrides the static ranks.
using TemporalHints = std::map<std::string, double>;

// De-duplicated, ordered goal categories implied by a pattern's clusters.
std::vector<std::string> map_goals(const Pattern& pattern,
                                   const analytics::ClusterAssignment& assignment,
                                   const GoalRules& rules,
                                   const TemporalHints* hints = nullptr);

struct GoalStateMachine {
    std::vector<std::string> states;  // sorted
    // (from, to) -> number of groups exhibiting that transition.
    std::map<std::pair<std::string, std::string>, int> edges;
};

// One directed edge per consecutive goal pair per group sequence.
GoalStateMachine build_state_machine(const std::vector<std::vector<std::string>>& sequences);

std::string state_machine_dot(const GoalStateMachine& machine);

}  // namespace iothp::grouping
