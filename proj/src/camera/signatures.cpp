#include "camera/signatures.hpp"

#include "util/strings.hpp"

namespace iothp::camera {

namespace {

std::string header(const HttpRequest& r, const std::string& name) {
    auto it = r.headers.find(name);
    return it == r.headers.end() ? std::string() : it->second;
}

bool query_has_injection(const HttpRequest& r) {
    std::string decoded = url_decode(r.query);
    if (decoded.empty()) return false;
    if (decoded.find(';') != std::string::npos) return true;
    if (decoded.find('|') != std::string::npos) return true;
    if (decoded.find('`') != std::string::npos) return true;
    if (decoded.find("$(") != std::string::npos) return true;
    if (decoded.find("&&") != std::string::npos) return true;
    return false;
}

}  // namespace

std::optional<std::string> classify_request(const HttpRequest& r) {
    if (r.malformed) return std::nullopt;

    // Snapshot URL brute forcing carries guessed credentials in the target.
    if (r.target.find("snapshot.cgi") != std::string::npos &&
        r.target.find("user=") != std::string::npos) {
        return "camera credential brute-force";
    }

    // DVR auth bypass: the magic admin cookie on the user-listing endpoint.
    if (r.path.rfind("/device.rsp", 0) == 0 &&
        util::contains(header(r, "cookie"), "uid=admin")) {
        return "CVE-2018-9995 bypass";
    }

    if (util::contains(header(r, "user-agent"), "() {") ||
        util::contains(header(r, "referer"), "() {")) {
        return "IP Camera - Shellshock";
    }

    // Netwave cameras leak their config (credentials included) at system.ini.
    if (r.target.find("system.ini") != std::string::npos &&
        r.target.find("loginuse") != std::string::npos) {
        return "Netwave IP Camera - Password Disclosure";
    }

    // Hikvision magic auth parameter (base64 "admin:11").
    if (r.path.find("/Security/users") != std::string::npos ||
        r.query.find("auth=YWRtaW46MTEK") != std::string::npos) {
        return "Hikvision IP Camera - Bypass Authentication";
    }

    // Foscam CGI proxy accepts empty operator credentials.
    if (r.path.find("CGIProxy.fcgi") != std::string::npos) {
        return "Foscam IP Camera - Bypass Authentication";
    }

    // D-Link rtpd.cgi runs whatever follows the '?'.
    if (r.path.find("rtpd.cgi") != std::string::npos) {
        return "[CVE-2013-1599] DLINK Camera";
    }

    if (query_has_injection(r)) return "Malicious Activity";

    return std::nullopt;
}

}  // namespace iothp::camera
