#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace iothp::util {

// Epoch milliseconds, UTC. All timestamps in the event log use this precision.
using Millis = int64_t;

Millis now_ms();

// "2024-05-01T12:30:45.123Z"
std::string format_iso8601_ms(Millis ms);

// Accepts ISO-8601 with 'Z' or numeric offset; fractional seconds of any
// length are truncated to milliseconds.
std::optional<Millis> parse_iso8601_ms(const std::string& s);

}  // namespace iothp::util
