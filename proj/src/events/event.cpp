#include "events/event.hpp"

#include "util/errors.hpp"

namespace iothp::events {

namespace {
struct KindName {
    EventKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {EventKind::Connect, "connect"},
    {EventKind::LoginAttempt, "login_attempt"},
    {EventKind::LoginSuccess, "login_success"},
    {EventKind::LoginFailure, "login_failure"},
    {EventKind::Command, "command"},
    {EventKind::HttpRequest, "http_request"},
    {EventKind::DownloadAttempt, "download_attempt"},
    {EventKind::Disconnect, "disconnect"},
};

bool has_key(const Event& e, const char* key) { return e.payload.count(key) > 0; }
}  // namespace

const char* kind_name(EventKind k) {
    for (const auto& kn : kKindNames) {
        if (kn.kind == k) return kn.name;
    }
    return "unknown";
}

std::optional<EventKind> kind_from_name(const std::string& name) {
    for (const auto& kn : kKindNames) {
        if (name == kn.name) return kn.kind;
    }
    return std::nullopt;
}

void validate_event(const Event& e) {
    if (e.src_port < 0 || e.src_port > 65535) {
        throw ValidationError("src_port out of range: " + std::to_string(e.src_port));
    }
    if (e.session.empty()) throw ValidationError("session id is empty");
    switch (e.kind) {
        case EventKind::Command:
            if (!has_key(e, "input")) throw ValidationError("command event missing payload key 'input'");
            break;
        case EventKind::LoginAttempt:
        case EventKind::LoginSuccess:
        case EventKind::LoginFailure:
            if (!has_key(e, "username") || !has_key(e, "password")) {
                throw ValidationError(std::string(kind_name(e.kind)) +
                                      " event missing payload key 'username' or 'password'");
            }
            break;
        case EventKind::HttpRequest:
            // Malformed requests are still logged; they carry raw_line instead
            // of a parsed method/path.
            if (!has_key(e, "malformed") && (!has_key(e, "method") || !has_key(e, "path"))) {
                throw ValidationError("http_request event missing payload key 'method' or 'path'");
            }
            break;
        case EventKind::DownloadAttempt:
            if (!has_key(e, "url") && !has_key(e, "url_parse_failed")) {
                throw ValidationError("download_attempt event missing 'url' (or url_parse_failed flag)");
            }
            break;
        case EventKind::Connect:
        case EventKind::Disconnect:
            break;
    }
}

nlohmann::ordered_json event_to_json(const Event& e) {
    nlohmann::ordered_json j;
    j["ts"] = util::format_iso8601_ms(e.ts);
    j["src_ip"] = e.src_ip;
    j["src_port"] = e.src_port;
    j["honeypot_id"] = e.honeypot_id;
    j["session"] = e.session;
    j["kind"] = kind_name(e.kind);
    nlohmann::ordered_json payload = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e.payload) payload[k] = v;
    j["payload"] = std::move(payload);
    return j;
}

std::string event_to_line(const Event& e) { return event_to_json(e).dump(); }

Event event_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("event record is not a JSON object");
    Event e;
    try {
        auto ts = util::parse_iso8601_ms(j.at("ts").get<std::string>());
        if (!ts) throw ParseError("unparseable ts: " + j.at("ts").get<std::string>());
        e.ts = *ts;
        e.src_ip = j.at("src_ip").get<std::string>();
        e.src_port = j.at("src_port").get<int>();
        e.honeypot_id = j.at("honeypot_id").get<std::string>();
        e.session = j.at("session").get<std::string>();
        auto kind = kind_from_name(j.at("kind").get<std::string>());
        if (!kind) throw ParseError("unknown kind: " + j.at("kind").get<std::string>());
        e.kind = *kind;
        const auto& payload = j.at("payload");
        if (!payload.is_object()) throw ParseError("payload is not an object");
        for (auto it = payload.begin(); it != payload.end(); ++it) {
            if (!it.value().is_string()) throw ParseError("payload value for '" + it.key() + "' is not a string");
            e.payload[it.key()] = it.value().get<std::string>();
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("bad event record: ") + ex.what());
    }
    validate_event(e);
    return e;
}

}  // namespace iothp::events
