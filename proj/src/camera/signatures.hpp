#pragma once

#include <optional>
#include <string>

#include "camera/http.hpp"

namespace iothp::camera {

// First matching attack signature in priority order, or nullopt for a benign
// request. Pure; the same request always yields the same label. The exotic
// vendor signatures follow published exploit shapes and are approximations.
std::optional<std::string> classify_request(const HttpRequest& request);

}  // namespace iothp::camera
