#include "analytics/labels.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "analytics/tokenize.hpp"
#include "util/errors.hpp"
#include "util/strings.hpp"

namespace iothp::analytics {

std::vector<ObjectiveRule> load_objective_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open rules file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("rules file '" + path + "': " + ex.what());
    }
    if (!j.is_array()) throw ParseError("rules file '" + path + "' must be a JSON array");
    std::vector<ObjectiveRule> rules;
    for (const auto& item : j) {
        ObjectiveRule r;
        try {
            r.pattern = item.at("pattern").get<std::string>();
            r.objective = item.at("objective").get<std::string>();
            std::string match = item.value("match", "substring");
            if (match == "token") {
                r.token_match = true;
            } else if (match != "substring") {
                throw ParseError("rules file '" + path + "': unknown match mode '" + match + "'");
            }
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError("rules file '" + path + "': " + ex.what());
        }
        if (r.pattern.empty()) throw ParseError("rules file '" + path + "': empty pattern");
        rules.push_back(std::move(r));
    }
    return rules;
}

std::vector<std::string> command_objectives(const std::string& command,
                                            const std::vector<ObjectiveRule>& rules) {
    std::vector<std::string> tokens = util::split_ws(command);
    std::vector<std::string> out;
    for (const auto& r : rules) {
        bool hit = r.token_match
                       ? std::find(tokens.begin(), tokens.end(), r.pattern) != tokens.end()
                       : util::contains(command, r.pattern);
        if (hit && std::find(out.begin(), out.end(), r.objective) == out.end()) {
            out.push_back(r.objective);
        }
    }
    return out;
}

int ClusterAssignment::cluster_for(const std::string& command) const {
    for (size_t i = 0; i < commands.size(); ++i) {
        if (commands[i] == command) return cluster_of[i];
    }
    return -1;
}

void label_clusters(ClusterAssignment& assignment, const std::vector<ObjectiveRule>& rules) {
    assignment.cluster_objectives.clear();
    for (size_t i = 0; i < assignment.commands.size(); ++i) {
        int cluster = assignment.cluster_of[i];
        auto& objs = assignment.cluster_objectives[cluster];
        for (const auto& o : command_objectives(assignment.commands[i], rules)) {
            if (std::find(objs.begin(), objs.end(), o) == objs.end()) objs.push_back(o);
        }
    }
    for (auto& [cluster, objs] : assignment.cluster_objectives) {
        if (objs.empty()) objs.push_back(kUnlabeled);
    }
}

void write_assignment(const std::string& path, const ClusterAssignment& assignment) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write assignment file '" + path + "'");
    for (size_t i = 0; i < assignment.commands.size(); ++i) {
        nlohmann::ordered_json j;
        j["command"] = assignment.commands[i];
        j["cluster"] = assignment.cluster_of[i];
        auto it = assignment.cluster_objectives.find(assignment.cluster_of[i]);
        j["objectives"] = it != assignment.cluster_objectives.end()
                              ? it->second
                              : std::vector<std::string>{};
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write to assignment file '" + path + "' failed");
}

ClusterAssignment read_assignment(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open assignment file '" + path + "'");
    ClusterAssignment a;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            a.commands.push_back(j.at("command").get<std::string>());
            int cluster = j.at("cluster").get<int>();
            a.cluster_of.push_back(cluster);
            auto& objs = a.cluster_objectives[cluster];
            for (const auto& o : j.at("objectives")) {
                std::string s = o.get<std::string>();
                if (std::find(objs.begin(), objs.end(), s) == objs.end()) objs.push_back(s);
            }
            a.k = std::max(a.k, cluster + 1);
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return a;
}

}  // namespace iothp::analytics
