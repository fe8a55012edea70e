#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "analytics/labels.hpp"
#include "events/actors.hpp"

namespace iothp::grouping {

// The set of command clusters one actor's commands fall into.
struct ActorProfile {
    std::string ip;
    std::set<int> clusters;
};

// Derives profiles from the cluster assignment. Actors with zero commands are
// omitted; a command missing from the assignment is an error naming it.
std::vector<ActorProfile> build_profiles(const analytics::ClusterAssignment& assignment,
                                         const events::ActorIndex& actors);

// A behavioral pattern: clusters shared by every supporter.
struct Pattern {
    std::set<int> clusters;
    std::set<std::string> supporters;

    bool operator==(const Pattern&) const = default;
};

// Candidate sets are the pairwise intersections of actor profiles. A
// candidate survives when it has at least min_clusters clusters and at least
// min_actors supporters (actors whose profile contains it). Identical cluster
// sets are merged, and a pattern that is a strict subset of another returned
// pattern with the same supporter set is dropped. Output order: descending
// cluster count, then lexicographic cluster sequence.
std::vector<Pattern> mine_patterns(const std::vector<ActorProfile>& profiles,
                                   size_t min_actors = 3, size_t min_clusters = 10);

}  // namespace iothp::grouping
