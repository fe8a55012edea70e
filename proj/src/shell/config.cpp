#include "shell/config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "util/errors.hpp"
#include "util/strings.hpp"

namespace iothp::shell {

namespace {

nlohmann::json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("'" + path + "': " + ex.what());
    }
}

}  // namespace

void validate(const ShellConfig& config) {
    if (config.phase < 1 || config.phase > 3) {
        throw ValidationError("shell phase must be 1, 2 or 3");
    }
    if (config.phase == 2 && config.allowlist.empty()) {
        throw ValidationError("phase 2 requires a non-empty allowlist");
    }
    if (config.phase == 3 && config.single_credential.first.empty()) {
        throw ValidationError("phase 3 requires a single credential with a username");
    }
    if (config.hostname.empty()) throw ValidationError("shell hostname must not be empty");
}

std::vector<std::pair<std::string, std::string>> load_allowlist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open allowlist '" + path + "'");
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = util::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto parts = util::split_ws(t);
        if (parts.size() != 2) {
            throw ParseError("allowlist '" + path + "' line " + std::to_string(lineno) +
                             ": expected 'username password'");
        }
        // A literal "" token stands for an empty field; attackers do try
        // empty usernames and passwords.
        auto unquote = [](const std::string& s) { return s == "\"\"" ? std::string() : s; };
        pairs.emplace_back(unquote(parts[0]), unquote(parts[1]));
    }
    return pairs;
}

std::vector<CommandRule> load_command_table(const std::string& path) {
    nlohmann::json j = parse_file(path);
    if (!j.is_array()) throw ParseError("command table '" + path + "' must be a JSON array");
    std::vector<CommandRule> rules;
    for (const auto& item : j) {
        CommandRule r;
        std::string match = item.value("match", "exact");
        if (match == "exact") {
            r.match = CommandRule::Match::Exact;
        } else if (match == "prefix") {
            r.match = CommandRule::Match::Prefix;
        } else {
            throw ParseError("command table '" + path + "': unknown match mode '" + match + "'");
        }
        r.pattern = item.at("pattern").get<std::string>();
        if (r.pattern.empty()) throw ParseError("command table '" + path + "': empty pattern");
        r.response = item.at("response").get<std::string>();
        rules.push_back(std::move(r));
    }
    return rules;
}

std::map<std::string, FsNode> load_fs_snapshot(const std::string& path) {
    nlohmann::json j = parse_file(path);
    if (!j.is_object()) throw ParseError("fs snapshot '" + path + "' must be a JSON object");
    std::map<std::string, FsNode> fs;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& p = it.key();
        if (p.empty() || p[0] != '/') {
            throw ParseError("fs snapshot '" + path + "': path '" + p + "' must be absolute");
        }
        FsNode node;
        std::string type = it.value().value("type", "file");
        if (type == "dir") {
            node.is_dir = true;
        } else if (type == "file") {
            node.is_dir = false;
            node.content = it.value().value("content", "");
        } else {
            throw ParseError("fs snapshot '" + path + "': unknown node type '" + type + "'");
        }
        fs[p] = std::move(node);
    }
    return fs;
}

ShellConfig load_shell_config(const std::string& path) {
    nlohmann::json j = parse_file(path);
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&base](const std::string& ref) {
        std::filesystem::path p(ref);
        return p.is_absolute() ? p.string() : (base / p).string();
    };

    ShellConfig config;
    try {
        config.phase = j.value("phase", 2);
        config.hostname = j.value("hostname", config.hostname);
        config.banner = j.value("banner", "");
        config.motd = j.value("motd", "");
        if (j.contains("single_credential")) {
            config.single_credential = {j["single_credential"].at("username").get<std::string>(),
                                        j["single_credential"].at("password").get<std::string>()};
        }
        if (j.contains("allowlist")) {
            for (const auto& pair : j["allowlist"]) {
                config.allowlist.emplace_back(pair.at(0).get<std::string>(),
                                              pair.at(1).get<std::string>());
            }
        }
        if (j.contains("allowlist_file")) {
            auto pairs = load_allowlist(resolve(j["allowlist_file"].get<std::string>()));
            config.allowlist.insert(config.allowlist.end(), pairs.begin(), pairs.end());
        }
        if (j.contains("commands_file")) {
            config.command_table = load_command_table(resolve(j["commands_file"].get<std::string>()));
        }
        if (j.contains("fs_file")) {
            config.fs = load_fs_snapshot(resolve(j["fs_file"].get<std::string>()));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("shell config '" + path + "': " + ex.what());
    }
    validate(config);
    return config;
}

}  // namespace iothp::shell
