#include "camera/profile.hpp"

#include <fstream>

#include <json.hpp>

#include "camera/bmp_text.hpp"
#include "util/base64.hpp"
#include "util/errors.hpp"
#include "util/rng.hpp"
#include "util/strings.hpp"

namespace iothp::camera {

namespace {

bool is_base64_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '+' || c == '/' || c == '=';
}

std::string page_shell(const CameraProfile& profile, const std::string& title,
                       const std::string& body) {
    return "<html><head><title>" + profile.model + " - " + title +
           "</title></head>\n<body bgcolor=\"#ffffff\">\n<h2>" + profile.model + " " + title +
           "</h2>\n" + body +
           "\n<hr><font size=\"1\">Copyright 2012-2016 D-Link Corporation</font>\n"
           "</body></html>\n";
}

}  // namespace

void validate(const CameraProfile& profile) {
    if (profile.model != "DCS-5020L" && profile.model != "DCS-5030L") {
        throw ValidationError("camera model must be DCS-5020L or DCS-5030L");
    }
    if (profile.username.empty()) throw ValidationError("camera username must not be empty");
    if (profile.password.empty()) throw ValidationError("camera password must not be empty");
    bool has_non_b64 = false;
    for (char c : profile.password) {
        if (!is_base64_char(c)) has_non_b64 = true;
    }
    if (!has_non_b64) {
        throw ValidationError(
            "camera password must contain a character outside the base64 alphabet "
            "(keeps the honeytoken image payload from ever spelling it)");
    }
    if (profile.frame_count < 2) throw ValidationError("camera needs at least 2 stream frames");
    if (profile.frame_interval_ms < 1) throw ValidationError("frame interval must be positive");
}

CameraProfile load_camera_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open camera profile '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("camera profile '" + path + "': " + ex.what());
    }
    CameraProfile profile;
    try {
        profile.model = j.value("model", profile.model);
        profile.username = j.value("username", profile.username);
        profile.password = j.value("password", profile.password);
        profile.server_header = j.value("server_header", profile.server_header);
        profile.artifacts_dir = j.value("artifacts_dir", profile.artifacts_dir);
        profile.frame_count = j.value("frame_count", profile.frame_count);
        profile.frame_interval_ms = j.value("frame_interval_ms", profile.frame_interval_ms);
        profile.seed = j.value("seed", profile.seed);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("camera profile '" + path + "': " + ex.what());
    }
    validate(profile);
    return profile;
}

const std::map<std::string, Page>& page_routes() {
    static const std::map<std::string, Page> routes = {
        {"/", Page::DeviceStatus},           {"/password.htm", Page::PasswordChange},
        {"/network.htm", Page::NetworkInfo}, {"/users.htm", Page::AddUser},
        {"/stream.htm", Page::LiveStream},   {"/upgrade.htm", Page::FirmwareUpload},
    };
    return routes;
}

std::string render_page(Page page, const CameraProfile& profile) {
    switch (page) {
        case Page::DeviceStatus:
            return page_shell(
                profile, "Device Status",
                "<table border=\"0\">\n"
                "<tr><td>Camera Name</td><td>" + profile.model + "</td></tr>\n"
                "<tr><td>Firmware Version</td><td>1.14.09</td></tr>\n"
                "<tr><td>MAC Address</td><td>B0:C5:54:2A:61:9E</td></tr>\n"
                "<tr><td>IP Address</td><td>192.168.0.20</td></tr>\n"
                "<tr><td>Video Mode</td><td>H.264 / MJPEG</td></tr>\n"
                "</table>\n"
                "<p><a href=\"/stream.htm\">Live Video</a> | <a href=\"/network.htm\">Network"
                "</a> | <a href=\"/users.htm\">Users</a> | <a href=\"/password.htm\">Admin"
                "</a> | <a href=\"/upgrade.htm\">Firmware Upgrade</a></p>");
        case Page::PasswordChange:
            return page_shell(
                profile, "Admin Password",
                "<form method=\"post\" action=\"/setSystemAdmin\">\n"
                "Old Password: <input type=\"password\" name=\"old\"><br>\n"
                "New Password: <input type=\"password\" name=\"new\"><br>\n"
                "Retype Password: <input type=\"password\" name=\"retype\"><br>\n"
                "<input type=\"submit\" value=\"Save\">\n</form>");
        case Page::NetworkInfo:
            return page_shell(
                profile, "Network Setup",
                "<table border=\"0\">\n"
                "<tr><td>DHCP</td><td>Enabled</td></tr>\n"
                "<tr><td>IP Address</td><td>192.168.0.20</td></tr>\n"
                "<tr><td>Subnet Mask</td><td>255.255.255.0</td></tr>\n"
                "<tr><td>Gateway</td><td>192.168.0.1</td></tr>\n"
                "<tr><td>Primary DNS</td><td>192.168.0.1</td></tr>\n"
                "<tr><td>HTTP Port</td><td>80</td></tr>\n"
                "</table>");
        case Page::AddUser:
            return page_shell(
                profile, "User List",
                "<form method=\"post\" action=\"/setSystemUser\">\n"
                "User Name: <input type=\"text\" name=\"user\"><br>\n"
                "Password: <input type=\"password\" name=\"pass\"><br>\n"
                "<input type=\"submit\" value=\"Add\">\n</form>\n"
                "<p>Current users: admin</p>");
        case Page::LiveStream:
            return page_shell(
                profile, "Live Video",
                "<img src=\"/video/mjpg.cgi\" width=\"640\" height=\"480\" "
                "alt=\"live stream\">\n<p>If the video does not start, check that your "
                "browser supports motion JPEG.</p>");
        case Page::FirmwareUpload:
            return page_shell(
                profile, "Firmware Upgrade",
                "<p>Current Firmware Version: 1.14.09</p>\n"
                "<form method=\"post\" action=\"/upgrade.cgi\" "
                "enctype=\"multipart/form-data\">\n"
                "File Path: <input type=\"file\" name=\"firmware\">\n"
                "<input type=\"submit\" value=\"Upload\">\n</form>\n"
                "<p>Do not power off the device during the upgrade.</p>");
    }
    throw ValidationError("unknown camera page");
}

std::string leak_page_html(const CameraProfile& profile) {
    std::string bmp = render_text_bmp(profile.username + " / " + profile.password, 3);
    std::string uri = "data:image/bmp;base64," + util::base64_encode(bmp);
    // Shaped like a forgotten config dump; the pair is only ever pixels.
    return "<html><head><title>" + profile.model +
           " - getuser</title></head>\n<body>\n"
           "<pre>index=0\nstate=enabled\n</pre>\n"
           "<img src=\"" + uri + "\" alt=\"account record\">\n"
           "</body></html>\n";
}

std::vector<std::string> make_frames(const CameraProfile& profile) {
    std::vector<std::string> frames;
    frames.reserve(profile.frame_count);
    for (int i = 0; i < profile.frame_count; ++i) {
        util::Rng rng(util::derive_seed(profile.seed, "frame-" + std::to_string(i)));
        std::string f;
        // SOI + JFIF APP0 marker, then deterministic filler, then EOI.
        f += "\xFF\xD8\xFF\xE0";
        f += std::string("\x00\x10", 2);
        f += "JFIF";
        f += std::string("\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00", 10);
        size_t filler = 1024 + static_cast<size_t>(i) * 64;
        for (size_t b = 0; b < filler; ++b) {
            char c = static_cast<char>(rng.index(256));
            if (c == '\xFF') c = '\x00';  // keep marker bytes unique
            f.push_back(c);
        }
        f += "\xFF\xD9";
        frames.push_back(std::move(f));
    }
    return frames;
}

}  // namespace iothp::camera
