#pragma once

#include <map>
#include <optional>
#include <string>

namespace iothp::camera {

// One parsed HTTP/1.1 request. Header names are lowercased.
struct HttpRequest {
    std::string method;
    std::string target;  // as received
    std::string path;    // target before '?'
    std::string query;   // after '?', possibly empty
    std::string version;
    std::map<std::string, std::string> headers;
    std::string body;
    bool malformed = false;
    std::string raw_first_line;
};

// Splits a request line; marks the request malformed instead of throwing.
HttpRequest parse_request_line(const std::string& line);

// "name: value" -> lowercased name + trimmed value; nullopt when not a
// header line.
std::optional<std::pair<std::string, std::string>> parse_header_line(const std::string& line);

// Percent-decoding with '+' as space; bad escapes pass through verbatim.
std::string url_decode(const std::string& s);

}  // namespace iothp::camera
