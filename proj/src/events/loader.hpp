#pragma once

#include <map>
#include <string>
#include <vector>

#include "events/event.hpp"

namespace iothp::events {

enum class Dialect { Native, Cowrie };

struct LoadReport {
    std::vector<Event> events;
    size_t lines = 0;
    size_t skipped = 0;
    // reason -> count, e.g. "bad_json", "unknown_eventid", "missing_field".
    std::map<std::string, size_t> skip_reasons;
};

// Loads an event log. Lenient mode (default) skips and counts malformed
// lines; strict mode throws ParseError on the first one. Cowrie dialect maps
// eventids onto native kinds:
//   cowrie.session.connect       -> connect
//   cowrie.login.success         -> login_success
//   cowrie.login.failed          -> login_failure
//   cowrie.command.input         -> command
//   cowrie.session.file_download -> download_attempt
//   cowrie.session.closed        -> disconnect
// and fields timestamp -> ts, src_ip -> src_ip, session -> session,
// sensor -> honeypot_id. Unknown eventids are skipped and counted.
LoadReport load_events(const std::string& path, Dialect dialect, bool strict = false);

}  // namespace iothp::events
