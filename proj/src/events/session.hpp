#pragma once

#include <string>
#include <vector>

#include "events/event.hpp"

namespace iothp::events {

// Ordered events from one connection; the unit of command extraction.
struct Session {
    std::string session_id;
    std::string actor_ip;
    std::vector<Event> events;
    util::Millis start = 0;
    util::Millis end = 0;
    bool truncated = false;  // no disconnect observed
};

// Partitions events by session id, time-sorts each partition (stable), and
// marks sessions without a disconnect as truncated. Session order follows
// first appearance in the input, so output is deterministic.
std::vector<Session> sessionize(const std::vector<Event>& events);

}  // namespace iothp::events
