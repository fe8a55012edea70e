#include "shell/engine.hpp"

#include <algorithm>
#include <set>

#include "util/hashing.hpp"
#include "util/strings.hpp"

namespace iothp::shell {

namespace {

const std::set<std::string>& busybox_applets() {
    static const std::set<std::string> applets = {
        "ash",  "cat",   "chmod", "cp",      "cpio", "date", "dd",    "df",    "echo",
        "free", "grep",  "kill",  "killall", "ln",   "ls",   "login", "mkdir", "mount",
        "mv",   "ping",  "ps",    "pwd",     "rm",   "sh",   "sleep", "tar",   "telnetd",
        "tftp", "top",   "uname", "vi",      "wget"};
    return applets;
}

const char* kBusyboxUsage =
    "BusyBox v1.16.1 (2012-03-27 10:36:54 CST) multi-call binary.\n"
    "Copyright (C) 1998-2009 Erik Andersen, Rob Landley, Denys Vlasenko\n"
    "and others. Licensed under GPLv2.\n"
    "See source distribution for full notice.\n"
    "\n"
    "Usage: busybox [function] [arguments]...\n"
    "   or: function [arguments]...\n"
    "\n"
    "\tBusyBox is a multi-call binary that combines many common Unix\n"
    "\tutilities into a single executable.  Most people will create a\n"
    "\tlink to busybox for each function they wish to use and BusyBox\n"
    "\twill act like whatever it was invoked as.\n"
    "\n"
    "Currently defined functions:\n"
    "\t[, [[, ash, cat, chmod, cp, cpio, date, dd, df, echo, free, grep,\n"
    "\tkill, killall, ln, login, ls, mkdir, mount, mv, ping, ps, pwd, rm,\n"
    "\tsh, sleep, tar, telnetd, tftp, top, uname, vi, wget\n";

std::string basename_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string strip_quotes(const std::string& tok) {
    if (tok.size() >= 2 && ((tok.front() == '\'' && tok.back() == '\'') ||
                            (tok.front() == '"' && tok.back() == '"'))) {
        return tok.substr(1, tok.size() - 2);
    }
    return tok;
}

std::string normalize_path(const std::string& cwd, const std::string& arg) {
    std::string raw = arg.empty() ? cwd : (arg[0] == '/' ? arg : cwd + "/" + arg);
    std::vector<std::string> parts;
    for (const auto& piece : util::split(raw, "/")) {
        if (piece.empty() || piece == ".") continue;
        if (piece == "..") {
            if (!parts.empty()) parts.pop_back();
            continue;
        }
        parts.push_back(piece);
    }
    if (parts.empty()) return "/";
    std::string out;
    for (const auto& p : parts) out += "/" + p;
    return out;
}

struct TemplateContext {
    const ShellSession& session;
    const ShellConfig& config;

    std::vector<std::pair<std::string, std::string>> vars() const {
        return {{"hostname", config.hostname},
                {"user", session.username.empty() ? "root" : session.username},
                {"cwd", session.cwd}};
    }
};

// Fake wget transfer text, shaped like busybox wget output.
std::string wget_response(const std::string& url) {
    std::string rest = url;
    auto scheme = rest.find("://");
    if (scheme != std::string::npos) rest = rest.substr(scheme + 3);
    auto slash = rest.find('/');
    std::string host = slash == std::string::npos ? rest : rest.substr(0, slash);
    std::string file = slash == std::string::npos ? "" : basename_of(rest.substr(slash));
    if (file.empty()) file = "index.html";
    // Pseudo-size derived from the URL so transcripts are stable.
    uint64_t h = 1469598103934665603ULL;
    for (char c : url) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    uint64_t size = 500 + h % 9000;
    std::string padded = file;
    if (padded.size() < 20) padded.resize(20, ' ');
    return "Connecting to " + host + " (" + host + ")\n" + padded +
           " 100% |*******************************|  " + std::to_string(size) +
           "   0:00:00 ETA";
}

}  // namespace

AuthResult authenticate(const std::pair<std::string, std::string>& credential,
                        const ShellConfig& config) {
    switch (config.phase) {
        case 1:
            return AuthResult::Success;
        case 2:
            for (const auto& pair : config.allowlist) {
                if (pair == credential) return AuthResult::Success;
            }
            return AuthResult::Failure;
        default:
            return credential == config.single_credential ? AuthResult::Success
                                                          : AuthResult::Failure;
    }
}

std::vector<std::string> split_composite(const std::string& input) {
    std::vector<std::string> parts;
    std::string current;
    bool in_single = false, in_double = false;
    for (size_t i = 0; i < input.size(); ++i) {
        char c = input[i];
        if (c == '\'' && !in_double) in_single = !in_single;
        if (c == '"' && !in_single) in_double = !in_double;
        if (!in_single && !in_double) {
            if (c == ';') {
                parts.push_back(current);
                current.clear();
                continue;
            }
            if (c == '&' && i + 1 < input.size() && input[i + 1] == '&') {
                parts.push_back(current);
                current.clear();
                ++i;
                continue;
            }
        }
        current.push_back(c);
    }
    parts.push_back(current);
    std::vector<std::string> trimmed;
    for (const auto& p : parts) {
        std::string t = util::trim(p);
        if (!t.empty()) trimmed.push_back(t);
    }
    return trimmed;
}

std::optional<DownloadRecord> parse_download(const std::vector<std::string>& tokens) {
    if (tokens.empty()) return std::nullopt;
    size_t start = 0;
    std::string name = basename_of(tokens[0]);
    if (name == "busybox" && tokens.size() > 1) {
        std::string applet = basename_of(tokens[1]);
        if (applet == "wget" || applet == "curl") {
            start = 1;
            name = applet;
        }
    }
    if (name != "wget" && name != "curl") return std::nullopt;

    static const std::set<std::string> wget_arg_flags = {"-O", "-o", "-P", "-T", "-t",
                                                         "-U", "--header", "--post-data"};
    static const std::set<std::string> curl_arg_flags = {
        "-o", "-H", "-d", "-X", "-u",        "-A",       "-e",     "-m",
        "--output", "--header", "--data", "--request", "--user", "--max-time", "--referer"};
    const auto& arg_flags = name == "wget" ? wget_arg_flags : curl_arg_flags;

    DownloadRecord record;
    for (size_t i = start + 1; i < tokens.size(); ++i) {
        const std::string& tok = tokens[i];
        if (!tok.empty() && tok[0] == '-') {
            if (arg_flags.count(tok)) ++i;  // flag with a detached value
            continue;
        }
        std::string candidate = strip_quotes(tok);
        if (candidate.empty()) continue;
        record.url = candidate.find("://") != std::string::npos ? candidate
                                                                : "http://" + candidate;
        record.placeholder_sha256 = util::sha256_hex(record.url);
        return record;
    }
    record.parse_failed = true;
    return record;
}

namespace {

// Builtin handlers return nullopt to decline (for shapes like pipes they
// cannot model), letting table rules catch the command instead.
std::optional<std::string> run_builtin(const std::vector<std::string>& tokens,
                                       ShellSession& session, const ShellConfig& config) {
    const std::string head = tokens[0];
    for (const auto& tok : tokens) {
        if (tok == "|") return std::nullopt;
    }

    if (head == "cd") {
        std::string target =
            tokens.size() < 2 ? (config.fs.count("/root") ? "/root" : "/")
                              : normalize_path(session.cwd, strip_quotes(tokens[1]));
        auto it = config.fs.find(target);
        if (it != config.fs.end() && it->second.is_dir) {
            session.cwd = target;
            return std::string();
        }
        return "-sh: cd: can't cd to " + (tokens.size() < 2 ? target : tokens[1]);
    }
    if (head == "pwd") return session.cwd;
    if (head == "cat") {
        if (tokens.size() < 2) return std::string();
        std::vector<std::string> chunks;
        for (size_t i = 1; i < tokens.size(); ++i) {
            std::string arg = strip_quotes(tokens[i]);
            if (!arg.empty() && arg[0] == '-') continue;
            std::string path = normalize_path(session.cwd, arg);
            auto it = config.fs.find(path);
            if (it == config.fs.end()) {
                chunks.push_back("cat: can't open '" + arg + "': No such file or directory");
            } else if (it->second.is_dir) {
                chunks.push_back("cat: read error: Is a directory");
            } else {
                chunks.push_back(it->second.content);
            }
        }
        return util::join(chunks, "\n");
    }
    if (head == "ls") {
        std::string arg;
        for (size_t i = 1; i < tokens.size(); ++i) {
            std::string t = strip_quotes(tokens[i]);
            if (!t.empty() && t[0] != '-') {
                arg = t;
                break;
            }
        }
        std::string path = normalize_path(session.cwd, arg);
        auto it = config.fs.find(path);
        if (it == config.fs.end()) {
            return "ls: " + (arg.empty() ? path : arg) + ": No such file or directory";
        }
        if (!it->second.is_dir) return basename_of(path);
        std::vector<std::string> names;
        std::string prefix = path == "/" ? "/" : path + "/";
        for (const auto& [p, node] : config.fs) {
            if (p.size() <= prefix.size() || p.compare(0, prefix.size(), prefix) != 0) continue;
            std::string rest = p.substr(prefix.size());
            if (rest.find('/') == std::string::npos) names.push_back(rest);
        }
        std::sort(names.begin(), names.end());
        return util::join(names, "  ");
    }
    if (head == "echo") {
        std::vector<std::string> out;
        for (size_t i = 1; i < tokens.size(); ++i) {
            const std::string& tok = tokens[i];
            if (i == 1 && (tok == "-n" || tok == "-e")) continue;
            if (tok.size() > 1 && tok[0] == '$') {
                std::string var = tok.substr(1);
                if (var.size() > 2 && var.front() == '{' && var.back() == '}') {
                    var = var.substr(1, var.size() - 2);
                }
                auto it = session.env.find(var);
                out.push_back(it == session.env.end() ? "" : it->second);
            } else {
                out.push_back(strip_quotes(tok));
            }
        }
        return util::join(out, " ");
    }
    if (head == "export") {
        for (size_t i = 1; i < tokens.size(); ++i) {
            auto eq = tokens[i].find('=');
            if (eq == std::string::npos || eq == 0) continue;
            session.env[tokens[i].substr(0, eq)] = strip_quotes(tokens[i].substr(eq + 1));
        }
        return std::string();
    }
    if (head == "/bin/busybox" || head == "busybox") {
        if (tokens.size() == 1) return std::string(kBusyboxUsage);
        const std::string applet = tokens[1];
        if (!busybox_applets().count(applet)) return applet + ": applet not found";
        return std::nullopt;  // known applet: fall through to the table rules
    }
    return std::nullopt;
}

struct ResolveResult {
    std::string output;
    std::optional<DownloadRecord> download;
};

ResolveResult resolve_single(const std::string& part, ShellSession& session,
                             const ShellConfig& config, int depth) {
    ResolveResult result;
    auto tokens = util::split_ws(part);
    if (tokens.empty()) return result;

    if (auto dl = parse_download(tokens)) {
        dl->command = part;
        if (dl->parse_failed) {
            result.output = basename_of(tokens[0]) == "curl"
                                ? "curl: try 'curl --help' for more information"
                                : "wget: missing URL";
        } else if (basename_of(tokens[0]) == "wget" ||
                   (tokens.size() > 1 && basename_of(tokens[1]) == "wget")) {
            result.output = wget_response(dl->url);
        }
        result.download = std::move(dl);
        return result;
    }

    TemplateContext ctx{session, config};
    for (const auto& rule : config.command_table) {
        if (rule.match == CommandRule::Match::Exact && rule.pattern == part) {
            result.output = util::render_template(rule.response, ctx.vars());
            return result;
        }
    }

    // Output redirection: run the left side, discard its output.
    for (size_t i = 1; i < tokens.size(); ++i) {
        if ((tokens[i] == ">" || tokens[i] == ">>") && depth < 2) {
            std::string lhs = util::trim(part.substr(0, part.find(tokens[i] == ">" ? " > " : " >> ")));
            if (lhs.empty()) return result;
            ResolveResult inner = resolve_single(lhs, session, config, depth + 1);
            result.download = std::move(inner.download);
            return result;
        }
    }

    if (auto builtin = run_builtin(tokens, session, config)) {
        result.output = *builtin;
        return result;
    }

    // A recognized busybox applet behaves like the bare command.
    if ((tokens[0] == "/bin/busybox" || tokens[0] == "busybox") && tokens.size() > 1 &&
        depth < 2) {
        std::string rest = util::trim(part.substr(part.find(tokens[1])));
        return resolve_single(rest, session, config, depth + 1);
    }

    for (const auto& rule : config.command_table) {
        if (rule.match == CommandRule::Match::Prefix &&
            part.compare(0, rule.pattern.size(), rule.pattern) == 0) {
            result.output = util::render_template(rule.response, ctx.vars());
            return result;
        }
    }

    result.output = tokens[0] + ": command not found";
    return result;
}

}  // namespace

ExecResult execute(const std::string& input, ShellSession& session, const ShellConfig& config) {
    ExecResult result;
    std::vector<std::string> outputs;
    for (const auto& part : split_composite(input)) {
        ResolveResult r = resolve_single(part, session, config, 0);
        if (!r.output.empty()) outputs.push_back(r.output);
        if (r.download) result.downloads.push_back(std::move(*r.download));
    }
    result.output = util::join(outputs, "\n");
    return result;
}

std::string prompt(const ShellSession& session, const ShellConfig& config) {
    std::string user = session.username.empty() ? "root" : session.username;
    std::string cwd = session.cwd == "/root" ? "~" : session.cwd;
    return user + "@" + config.hostname + ":" + cwd + "# ";
}

}  // namespace iothp::shell
