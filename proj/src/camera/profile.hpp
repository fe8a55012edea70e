#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace iothp::camera {

struct CameraProfile {
    std::string model = "DCS-5020L";  // or DCS-5030L
    std::string username = "admin";
    // Honeytoken password. Must contain at least one character outside the
    // base64 alphabet so it cannot occur inside any base64 payload we emit.
    std::string password = "Vx7!mK2#pQ9w";
    std::string server_header = "alphapd/2.1.8";
    std::string artifacts_dir = "artifacts";
    int frame_count = 8;
    int frame_interval_ms = 250;
    uint64_t seed = 1;
};

void validate(const CameraProfile& profile);
CameraProfile load_camera_profile(const std::string& path);

// The six admin pages the camera advertises.
enum class Page {
    DeviceStatus,
    PasswordChange,
    NetworkInfo,
    AddUser,
    LiveStream,
    FirmwareUpload,
};

// path -> page; exactly six entries.
const std::map<std::string, Page>& page_routes();

std::string render_page(Page page, const CameraProfile& profile);

// The crafted info-leak page: credentials appear only as a BMP data URI.
std::string leak_page_html(const CameraProfile& profile);

// Deterministic JPEG-marker frames for the fake stream; cycling them yields
// the "few seconds of video" loop.
std::vector<std::string> make_frames(const CameraProfile& profile);

}  // namespace iothp::camera
