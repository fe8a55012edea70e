#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace iothp::util {

std::string trim(std::string_view s);

// Split on runs of whitespace; no empty tokens.
std::vector<std::string> split_ws(std::string_view s);

// Split on a literal separator; keeps empty fields.
std::vector<std::string> split(std::string_view s, std::string_view sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string to_lower(std::string_view s);

bool contains(std::string_view haystack, std::string_view needle);

// Replaces every occurrence of ${key} using the supplied lookup pairs.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& vars);

}  // namespace iothp::util
