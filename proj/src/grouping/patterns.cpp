#include "grouping/patterns.hpp"

#include <algorithm>
#include <unordered_map>

#include "util/errors.hpp"

namespace iothp::grouping {

std::vector<ActorProfile> build_profiles(const analytics::ClusterAssignment& assignment,
                                         const events::ActorIndex& actors) {
    std::unordered_map<std::string, int> cluster_index;
    for (size_t i = 0; i < assignment.commands.size(); ++i) {
        cluster_index.emplace(assignment.commands[i], assignment.cluster_of[i]);
    }
    std::vector<ActorProfile> profiles;
    for (const auto& [ip, actor] : actors) {
        if (actor.commands.empty()) continue;
        ActorProfile p;
        p.ip = ip;
        for (const auto& cmd : actor.commands) {
            auto it = cluster_index.find(cmd);
            if (it == cluster_index.end()) {
                throw ValidationError("actor " + ip + " command not present in assignment: " + cmd);
            }
            p.clusters.insert(it->second);
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

namespace {

bool subset_of(const std::set<int>& small, const std::set<int>& big) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

std::vector<Pattern> mine_patterns(const std::vector<ActorProfile>& profiles, size_t min_actors,
                                   size_t min_clusters) {
    if (min_actors < 1 || min_clusters < 1) {
        throw ValidationError("mine_patterns: thresholds must be >= 1");
    }
    // Pairwise intersections, deduplicated.
    std::set<std::set<int>> candidates;
    for (size_t i = 0; i < profiles.size(); ++i) {
        for (size_t j = i + 1; j < profiles.size(); ++j) {
            std::set<int> inter;
            std::set_intersection(profiles[i].clusters.begin(), profiles[i].clusters.end(),
                                  profiles[j].clusters.begin(), profiles[j].clusters.end(),
                                  std::inserter(inter, inter.begin()));
            if (inter.size() >= min_clusters) candidates.insert(std::move(inter));
        }
    }
    std::vector<Pattern> kept;
    for (const auto& cand : candidates) {
        Pattern p;
        p.clusters = cand;
        for (const auto& prof : profiles) {
            if (subset_of(cand, prof.clusters)) p.supporters.insert(prof.ip);
        }
        if (p.supporters.size() >= min_actors) kept.push_back(std::move(p));
    }
    // Maximality: a strict subset adds nothing when the same actors support a
    // strictly larger pattern.
    std::vector<Pattern> maximal;
    for (const auto& p : kept) {
        bool dominated = false;
        for (const auto& q : kept) {
            if (p.clusters.size() < q.clusters.size() && p.supporters == q.supporters &&
                subset_of(p.clusters, q.clusters)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) maximal.push_back(p);
    }
    std::sort(maximal.begin(), maximal.end(), [](const Pattern& a, const Pattern& b) {
        if (a.clusters.size() != b.clusters.size()) return a.clusters.size() > b.clusters.size();
        return a.clusters < b.clusters;
    });
    return maximal;
}

}  // namespace iothp::grouping
