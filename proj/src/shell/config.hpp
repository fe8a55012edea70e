#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace iothp::shell {

// One canned-response rule. Exact rules match the whole trimmed command;
// prefix rules match its head. Responses are templates over ${hostname},
// ${user} and ${cwd}.
struct CommandRule {
    enum class Match { Exact, Prefix };
    Match match = Match::Exact;
    std::string pattern;
    std::string response;
};

struct FsNode {
    bool is_dir = false;
    std::string content;
};

struct ShellConfig {
    int phase = 2;
    std::vector<std::pair<std::string, std::string>> allowlist;      // phase 2
    std::pair<std::string, std::string> single_credential;           // phase 3
    std::string hostname = "dlink";
    std::string banner;  // printed before the login prompt; may be empty
    std::string motd;    // printed after a successful login
    std::vector<CommandRule> command_table;
    std::map<std::string, FsNode> fs;  // absolute path -> node
};

// Phase-specific requirements: phase 2 needs a non-empty allowlist, phase 3
// a credential with a non-empty username.
void validate(const ShellConfig& config);

// Loads shell.json. allowlist_file / commands_file / fs_file references are
// resolved relative to the config file's directory.
ShellConfig load_shell_config(const std::string& path);

// Allowlist file: one "username password" pair per line, '#' comments.
std::vector<std::pair<std::string, std::string>> load_allowlist(const std::string& path);

std::vector<CommandRule> load_command_table(const std::string& path);

std::map<std::string, FsNode> load_fs_snapshot(const std::string& path);

}  // namespace iothp::shell
