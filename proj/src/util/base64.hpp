#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iothp::util {

std::string base64_encode(const uint8_t* data, size_t len);
std::string base64_encode(const std::string& data);
std::optional<std::vector<uint8_t>> base64_decode(const std::string& in);

}  // namespace iothp::util
