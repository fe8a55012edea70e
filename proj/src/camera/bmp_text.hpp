#pragma once

#include <string>

namespace iothp::camera {

// Renders one line of text as a 24-bit BMP (black on white, 5x7 font scaled
// up). The credentials leak page embeds this so the secret exists only as
// pixels, never as text bytes.
std::string render_text_bmp(const std::string& text, int scale = 3);

}  // namespace iothp::camera
