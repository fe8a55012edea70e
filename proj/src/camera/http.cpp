#include "camera/http.hpp"

#include "util/strings.hpp"

namespace iothp::camera {

HttpRequest parse_request_line(const std::string& line) {
    HttpRequest req;
    req.raw_first_line = line;
    auto parts = util::split_ws(line);
    if (parts.size() != 3 || parts[2].rfind("HTTP/", 0) != 0 || parts[1].empty() ||
        parts[1][0] != '/') {
        req.malformed = true;
        return req;
    }
    req.method = parts[0];
    req.target = parts[1];
    req.version = parts[2];
    auto qs = req.target.find('?');
    if (qs == std::string::npos) {
        req.path = req.target;
    } else {
        req.path = req.target.substr(0, qs);
        req.query = req.target.substr(qs + 1);
    }
    return req;
}

std::optional<std::pair<std::string, std::string>> parse_header_line(const std::string& line) {
    auto colon = line.find(':');
    if (colon == std::string::npos || colon == 0) return std::nullopt;
    std::string name = util::to_lower(util::trim(line.substr(0, colon)));
    std::string value = util::trim(line.substr(colon + 1));
    if (name.empty()) return std::nullopt;
    return std::make_pair(name, value);
}

std::string url_decode(const std::string& s) {
    auto hex = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '+') {
            out.push_back(' ');
        } else if (s[i] == '%' && i + 2 < s.size() && hex(s[i + 1]) >= 0 && hex(s[i + 2]) >= 0) {
            out.push_back(static_cast<char>(hex(s[i + 1]) * 16 + hex(s[i + 2])));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

}  // namespace iothp::camera
