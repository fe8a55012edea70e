#include "events/loader.hpp"

#include <fstream>
#include <optional>

#include "util/errors.hpp"
#include "util/strings.hpp"

namespace iothp::events {

namespace {

struct CowrieMapping {
    const char* eventid;
    EventKind kind;
};

constexpr CowrieMapping kCowrieMap[] = {
    {"cowrie.session.connect", EventKind::Connect},
    {"cowrie.login.success", EventKind::LoginSuccess},
    {"cowrie.login.failed", EventKind::LoginFailure},
    {"cowrie.command.input", EventKind::Command},
    {"cowrie.session.file_download", EventKind::DownloadAttempt},
    {"cowrie.session.closed", EventKind::Disconnect},
};

std::optional<EventKind> map_cowrie_eventid(const std::string& id) {
    for (const auto& m : kCowrieMap) {
        if (id == m.eventid) return m.kind;
    }
    return std::nullopt;
}

void copy_if_string(const nlohmann::json& j, const char* from, Event& e, const char* to) {
    auto it = j.find(from);
    if (it != j.end() && it->is_string()) e.payload[to] = it->get<std::string>();
}

// One Cowrie record -> Event, or a skip reason.
Event cowrie_to_event(const nlohmann::json& j, std::string& skip_reason) {
    if (!j.is_object()) {
        skip_reason = "not_an_object";
        throw ParseError("cowrie record is not an object");
    }
    auto id_it = j.find("eventid");
    if (id_it == j.end() || !id_it->is_string()) {
        skip_reason = "missing_eventid";
        throw ParseError("cowrie record missing eventid");
    }
    auto kind = map_cowrie_eventid(id_it->get<std::string>());
    if (!kind) {
        skip_reason = "unknown_eventid";
        throw ParseError("unmapped cowrie eventid: " + id_it->get<std::string>());
    }
    Event e;
    e.kind = *kind;
    auto ts_it = j.find("timestamp");
    if (ts_it == j.end() || !ts_it->is_string()) {
        skip_reason = "missing_field";
        throw ParseError("cowrie record missing timestamp");
    }
    auto ts = util::parse_iso8601_ms(ts_it->get<std::string>());
    if (!ts) {
        skip_reason = "bad_timestamp";
        throw ParseError("unparseable cowrie timestamp: " + ts_it->get<std::string>());
    }
    e.ts = *ts;
    auto ip_it = j.find("src_ip");
    auto sess_it = j.find("session");
    if (ip_it == j.end() || !ip_it->is_string() || sess_it == j.end() || !sess_it->is_string()) {
        skip_reason = "missing_field";
        throw ParseError("cowrie record missing src_ip or session");
    }
    e.src_ip = ip_it->get<std::string>();
    e.session = sess_it->get<std::string>();
    auto port_it = j.find("src_port");
    if (port_it != j.end() && port_it->is_number_integer()) e.src_port = port_it->get<int>();
    auto sensor_it = j.find("sensor");
    e.honeypot_id = (sensor_it != j.end() && sensor_it->is_string()) ? sensor_it->get<std::string>()
                                                                     : "cowrie";
    copy_if_string(j, "username", e, "username");
    copy_if_string(j, "password", e, "password");
    copy_if_string(j, "input", e, "input");
    copy_if_string(j, "url", e, "url");
    copy_if_string(j, "protocol", e, "protocol");
    try {
        validate_event(e);
    } catch (const ValidationError&) {
        skip_reason = "missing_field";
        throw;
    }
    return e;
}

}  // namespace

LoadReport load_events(const std::string& path, Dialect dialect, bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open event file '" + path + "'");
    LoadReport report;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = util::trim(line);
        if (stripped.empty()) continue;
        ++report.lines;
        std::string reason = "bad_json";
        try {
            nlohmann::json j = nlohmann::json::parse(stripped);
            if (dialect == Dialect::Native) {
                reason = "bad_record";
                report.events.push_back(event_from_json(j));
            } else {
                report.events.push_back(cowrie_to_event(j, reason));
            }
        } catch (const Error& ex) {
            if (strict) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": " + ex.what());
            }
            ++report.skipped;
            ++report.skip_reasons[reason];
        } catch (const nlohmann::json::exception& ex) {
            if (strict) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": " + ex.what());
            }
            ++report.skipped;
            ++report.skip_reasons["bad_json"];
        }
    }
    return report;
}

}  // namespace iothp::events
