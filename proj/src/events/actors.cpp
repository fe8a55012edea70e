#include "events/actors.hpp"

namespace iothp::events {

ActorIndex build_actor_index(const std::vector<Session>& sessions) {
    ActorIndex index;
    for (const Session& s : sessions) {
        Actor& actor = index[s.actor_ip];
        actor.ip = s.actor_ip;
        actor.sessions.push_back(s.session_id);
        for (const Event& e : s.events) {
            if (e.kind == EventKind::Command) {
                actor.commands.push_back(e.payload.at("input"));
            }
        }
    }
    return index;
}

}  // namespace iothp::events
