#pragma once

#include <map>
#include <optional>
#include <string>

namespace iothp::util {

// Parsed INI-style file: section -> key -> value. Case-sensitive names.
// '#' and ';' start full-line comments; inline comments are not a thing, so
// values may contain either character. Duplicate keys within a section and
// keys outside any section are parse errors, not silent last-wins.
struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    std::optional<std::string> get(const std::string& section, const std::string& key) const;
};

// ParseError messages carry the 1-based line number.
IniFile parse_ini_text(const std::string& text);

// IoError when unreadable, otherwise parse_ini_text semantics.
IniFile parse_ini_file(const std::string& path);

}  // namespace iothp::util
