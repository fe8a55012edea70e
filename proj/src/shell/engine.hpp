#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shell/config.hpp"

namespace iothp::shell {

// Connection-local shell state. Commands only run once authenticated.
struct ShellSession {
    std::string session_id;
    bool authenticated = false;
    std::string username;
    std::string cwd = "/";
    std::map<std::string, std::string> env;
};

enum class AuthResult { Success, Failure };

// Phase 1 accepts everything, phase 2 the allowlist, phase 3 exactly the
// configured single credential.
AuthResult authenticate(const std::pair<std::string, std::string>& credential,
                        const ShellConfig& config);

// One captured wget/curl invocation. Nothing is ever fetched; the hash is a
// synthetic placeholder derived from the URL text.
struct DownloadRecord {
    std::string command;  // the sub-command that triggered the capture
    std::string url;
    bool parse_failed = false;
    std::string placeholder_sha256;
};

struct ExecResult {
    std::string output;  // '\n'-separated; no trailing prompt
    std::vector<DownloadRecord> downloads;
};

// Runs one raw input line: splits composites on ';' and '&&' (quotes
// respected), resolves each piece as downloader grammar, exact table rule,
// builtin, then prefix rule, and falls back to "<cmd>: command not found".
// Deterministic for a given (input, session state, config).
ExecResult execute(const std::string& input, ShellSession& session, const ShellConfig& config);

std::string prompt(const ShellSession& session, const ShellConfig& config);

// Exposed for tests.
std::vector<std::string> split_composite(const std::string& input);
std::optional<DownloadRecord> parse_download(const std::vector<std::string>& tokens);

}  // namespace iothp::shell
