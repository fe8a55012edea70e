#include "events/session.hpp"

#include <algorithm>
#include <unordered_map>

namespace iothp::events {

std::vector<Session> sessionize(const std::vector<Event>& events) {
    std::vector<Session> sessions;
    std::unordered_map<std::string, size_t> index;
    for (const Event& e : events) {
        auto [it, inserted] = index.try_emplace(e.session, sessions.size());
        if (inserted) {
            Session s;
            s.session_id = e.session;
            s.actor_ip = e.src_ip;
            sessions.push_back(std::move(s));
        }
        Session& s = sessions[it->second];
        if (s.actor_ip.empty()) s.actor_ip = e.src_ip;
        s.events.push_back(e);
    }
    for (Session& s : sessions) {
        std::stable_sort(s.events.begin(), s.events.end(),
                         [](const Event& a, const Event& b) { return a.ts < b.ts; });
        s.start = s.events.front().ts;
        s.end = s.events.back().ts;
        s.truncated = s.events.back().kind != EventKind::Disconnect;
    }
    return sessions;
}

}  // namespace iothp::events
