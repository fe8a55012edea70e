#pragma once

#include <cstdint>
#include <string>

namespace iothp::util {

std::string sha256_hex(const uint8_t* data, size_t len);
std::string sha256_hex(const std::string& data);

}  // namespace iothp::util
