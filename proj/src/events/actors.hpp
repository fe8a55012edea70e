#pragma once

#include <map>
#include <string>
#include <vector>

#include "events/session.hpp"

namespace iothp::events {

// An attacker identity: one remote source IP, the sessions it opened, and the
// multiset of commands it executed (in session order).
struct Actor {
    std::string ip;
    std::vector<std::string> sessions;
    std::vector<std::string> commands;
};

using ActorIndex = std::map<std::string, Actor>;

// Every session is assigned to exactly one actor by source IP; an actor's
// command list is the concatenation of its sessions' command inputs.
ActorIndex build_actor_index(const std::vector<Session>& sessions);

}  // namespace iothp::events
