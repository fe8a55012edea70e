#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "util/timeutil.hpp"

namespace iothp::events {

enum class EventKind {
    Connect,
    LoginAttempt,
    LoginSuccess,
    LoginFailure,
    Command,
    HttpRequest,
    DownloadAttempt,
    Disconnect,
};

const char* kind_name(EventKind k);
std::optional<EventKind> kind_from_name(const std::string& name);

// One timestamped honeypot observation. Serialized as one JSON line with the
// fields: ts, src_ip, src_port, honeypot_id, session, kind, payload.
struct Event {
    util::Millis ts = 0;
    std::string src_ip;
    int src_port = 0;
    std::string honeypot_id;
    std::string session;
    EventKind kind = EventKind::Connect;
    std::map<std::string, std::string> payload;

    bool operator==(const Event&) const = default;
};

// Throws ValidationError when the kind's required payload keys are missing or
// src_port is out of range.
void validate_event(const Event& e);

nlohmann::ordered_json event_to_json(const Event& e);
std::string event_to_line(const Event& e);

// Parses one native JSON-lines record. Throws ParseError / ValidationError.
Event event_from_json(const nlohmann::json& j);

}  // namespace iothp::events
