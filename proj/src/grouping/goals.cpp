#include "grouping/goals.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "util/errors.hpp"

namespace iothp::grouping {

GoalRules load_goal_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open goal rules file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("goal rules file '" + path + "': " + ex.what());
    }
    GoalRules rules;
    try {
        for (const auto& item : j.at("goals")) {
            GoalRules::Entry e;
            e.goal = item.at("goal").get<std::string>();
            e.rank = item.at("rank").get<int>();
            rules.by_objective[item.at("objective").get<std::string>()] = e;
        }
        rules.default_goal = j.value("default_goal", rules.default_goal);
        rules.default_rank = j.value("default_rank", rules.default_rank);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("goal rules file '" + path + "': " + ex.what());
    }
    return rules;
}

std::vector<std::string> map_goals(const Pattern& pattern,
                                   const analytics::ClusterAssignment& assignment,
                                   const GoalRules& rules, const TemporalHints* hints) {
    struct GoalEntry {
        std::string goal;
        int rank;
    };
    std::vector<GoalEntry> goals;
    auto add = [&goals](const std::string& goal, int rank) {
        for (const auto& g : goals) {
            if (g.goal == goal) return;
        }
        goals.push_back({goal, rank});
    };
    for (int cluster : pattern.clusters) {
        auto it = assignment.cluster_objectives.find(cluster);
        bool labeled = false;
        if (it != assignment.cluster_objectives.end()) {
            for (const auto& objective : it->second) {
                if (objective == analytics::kUnlabeled) continue;
                auto rule = rules.by_objective.find(objective);
                if (rule != rules.by_objective.end()) {
                    add(rule->second.goal, rule->second.rank);
                } else {
                    add(rules.default_goal, rules.default_rank);
                }
                labeled = true;
            }
        }
        if (!labeled) add(rules.default_goal, rules.default_rank);
    }
    // Temporal hints only apply when they cover every goal; a mixed
    // hint/rank comparison would not order the goals consistently.
    bool use_hints = hints != nullptr && !goals.empty();
    if (use_hints) {
        for (const auto& g : goals) {
            if (hints->find(g.goal) == hints->end()) {
                use_hints = false;
                break;
            }
        }
    }
    std::stable_sort(goals.begin(), goals.end(), [&](const GoalEntry& a, const GoalEntry& b) {
        if (use_hints) {
            double ha = hints->at(a.goal);
            double hb = hints->at(b.goal);
            if (ha != hb) return ha < hb;
        } else if (a.rank != b.rank) {
            return a.rank < b.rank;
        }
        return a.goal < b.goal;
    });
    std::vector<std::string> out;
    out.reserve(goals.size());
    for (const auto& g : goals) out.push_back(g.goal);
    return out;
}

GoalStateMachine build_state_machine(const std::vector<std::vector<std::string>>& sequences) {
    GoalStateMachine machine;
    std::set<std::string> states;
    for (const auto& seq : sequences) {
        std::set<std::pair<std::string, std::string>> seen;  // one count per group
        for (const auto& goal : seq) states.insert(goal);
        for (size_t i = 0; i + 1 < seq.size(); ++i) {
            auto edge = std::make_pair(seq[i], seq[i + 1]);
            if (seen.insert(edge).second) ++machine.edges[edge];
        }
    }
    machine.states.assign(states.begin(), states.end());
    return machine;
}

std::string state_machine_dot(const GoalStateMachine& machine) {
    std::ostringstream out;
    out << "digraph attacker_goals {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box];\n";
    for (const auto& s : machine.states) {
        out << "  \"" << s << "\";\n";
    }
    for (const auto& [edge, support] : machine.edges) {
        out << "  \"" << edge.first << "\" -> \"" << edge.second << "\" [label=\"" << support
            << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace iothp::grouping
