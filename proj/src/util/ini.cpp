#include "util/ini.hpp"

#include <fstream>
#include <sstream>

#include "util/errors.hpp"
#include "util/strings.hpp"

namespace iothp::util {

std::optional<std::string> IniFile::get(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

IniFile parse_ini_text(const std::string& text) {
    IniFile ini;
    std::string current;
    bool in_section = false;
    std::istringstream stream(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(stream, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ParseError("ini line " + std::to_string(lineno) + ": malformed section header");
            }
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty()) {
                throw ParseError("ini line " + std::to_string(lineno) + ": empty section name");
            }
            in_section = true;
            ini.sections[current];  // a section may be legitimately empty
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("ini line " + std::to_string(lineno) + ": expected key = value");
        }
        if (!in_section) {
            throw ParseError("ini line " + std::to_string(lineno) + ": key outside any section");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ParseError("ini line " + std::to_string(lineno) + ": empty key");
        }
        auto [it, inserted] = ini.sections[current].emplace(key, value);
        (void)it;
        if (!inserted) {
            throw ParseError("ini line " + std::to_string(lineno) + ": duplicate key '" + key +
                             "' in [" + current + "]");
        }
    }
    return ini;
}

IniFile parse_ini_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw IoError("cannot read ini file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ini_text(buf.str());
}

}  // namespace iothp::util
