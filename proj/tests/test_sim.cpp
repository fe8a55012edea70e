#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <set>

#include "camera/profile.hpp"
#include "camera/server.hpp"
#include "events/actors.hpp"
#include "events/session.hpp"
#include "events/sink.hpp"
#include "netio/net.hpp"
#include "shell/config.hpp"
#include "shell/server.hpp"
#include "sim/run.hpp"
#include "sim/scenario.hpp"
#include "sim/vet.hpp"
#include "support/temp_dir.hpp"
#include "support/testnet.hpp"
#include "util/base64.hpp"
#include "util/errors.hpp"
#include "util/hashing.hpp"
#include "util/strings.hpp"

using namespace iothp;
using iothp::testsupport::TempDir;

namespace {

const std::string kConfDir = IOTHP_CONF_DIR;

sim::ScenarioConfig three_families() {
    return sim::load_scenario(kConfDir + "/scenarios/three_families.json");
}

int count_kind(const std::vector<events::Event>& evs, events::EventKind kind) {
    return static_cast<int>(std::count_if(evs.begin(), evs.end(),
                                          [&](const events::Event& e) { return e.kind == kind; }));
}

struct LiveShell {
    std::shared_ptr<events::MemoryEventSink> sink = std::make_shared<events::MemoryEventSink>();
    std::optional<shell::ShellServer> server;

    // source_tags matches the scenario runner; vet probes model an outside
    // client and need the production framing, so they pass false.
    explicit LiveShell(shell::ShellConfig config, bool source_tags = true) {
        shell::ShellServerOptions options;
        options.port = 0;
        options.idle_timeout_ms = 5000;
        options.test_source_tags = source_tags;
        server.emplace(std::move(config), sink, options);
        server->start();
    }
    ~LiveShell() { server->stop(); }

    sim::Endpoint endpoint() const { return {"127.0.0.1", server->port()}; }
};

struct LiveCamera {
    TempDir tmp;
    std::shared_ptr<events::MemoryEventSink> sink = std::make_shared<events::MemoryEventSink>();
    camera::CameraProfile profile;
    std::optional<camera::CameraServer> server;

    LiveCamera() {
        profile = camera::load_camera_profile(kConfDir + "/camera.json");
        profile.artifacts_dir = (tmp.path() / "artifacts").string();
        profile.frame_count = 2;
        profile.frame_interval_ms = 10;
        camera::CameraServerOptions options;
        options.port = 0;
        options.idle_timeout_ms = 3000;
        options.trust_forwarded_for = true;
        server.emplace(profile, sink, options);
        server->start();
    }
    ~LiveCamera() { server->stop(); }

    sim::Endpoint endpoint() const { return {"127.0.0.1", server->port()}; }
};

}  // namespace

TEST_CASE("scenario loader reads the shipped files") {
    auto config = three_families();
    CHECK(config.name == "three-families");
    CHECK(config.min_actors == 3);
    CHECK(config.min_clusters == 10);
    REQUIRE(config.families.size() == 3);
    CHECK(config.families[0].family == "mirai-like");
    CHECK(config.families[0].target == sim::Target::Shell);
    CHECK(config.families[0].actors == 10);
    CHECK(config.families[0].credentials.size() == 1);
    CHECK(config.families[0].steps.size() == 10);
    CHECK(config.families[0].steps[2].command == "/bin/busybox cp; /gisdfoewrsfdf");

    auto mixed = sim::load_scenario(kConfDir + "/scenarios/mixed_probe.json");
    REQUIRE(mixed.families.size() == 2);
    CHECK(mixed.families[1].target == sim::Target::Camera);
    CHECK(mixed.families[1].steps[1].headers.at("Cookie") == "uid=admin");
    CHECK(mixed.families[1].steps[9].body == "FAKEFW10-NOT-REAL-FIRMWARE");
}

TEST_CASE("scenario loader rejects broken files") {
    TempDir tmp;
    auto write = [&](const char* body) { return tmp.write("s.json", body); };
    CHECK_THROWS_AS(sim::load_scenario((tmp.path() / "absent.json").string()), IoError);
    CHECK_THROWS_AS(sim::load_scenario(write("{nope")), ParseError);
    CHECK_THROWS_AS(sim::load_scenario(write(R"({"name":"x"})")), ValidationError);
    // shell family without credentials
    CHECK_THROWS_AS(sim::load_scenario(write(
                        R"({"name":"x","families":[{"name":"f","target":"shell","actors":1,
                             "steps":[{"input":"ls"}]}]})")),
                    ValidationError);
    // unknown target
    CHECK_THROWS_AS(sim::load_scenario(write(
                        R"({"name":"x","families":[{"name":"f","target":"ftp","actors":1,
                             "credentials":[["a","b"]],"steps":[{"input":"ls"}]}]})")),
                    ParseError);
    // duplicate family name
    CHECK_THROWS_AS(sim::load_scenario(write(
                        R"({"name":"x","families":[
                             {"name":"f","target":"shell","actors":1,"credentials":[["a","b"]],
                              "steps":[{"input":"ls"}]},
                             {"name":"f","target":"shell","actors":1,"credentials":[["a","b"]],
                              "steps":[{"input":"ls"}]}]})")),
                    ValidationError);
    // camera step that is not "METHOD target"
    CHECK_THROWS_AS(sim::load_scenario(write(
                        R"({"name":"x","families":[{"name":"f","target":"camera","actors":1,
                             "steps":[{"request":"GET"}]}]})")),
                    ParseError);
    // inverted delay range
    CHECK_THROWS_AS(sim::load_scenario(write(
                        R"({"name":"x","families":[{"name":"f","target":"shell","actors":1,
                             "credentials":[["a","b"]],"delay_ms":[5,1],
                             "steps":[{"input":"ls"}]}]})")),
                    ValidationError);
}

TEST_CASE("actor ips are deterministic and family-scoped") {
    CHECK(sim::actor_ip(0, 0) == "198.18.0.1");
    CHECK(sim::actor_ip(2, 9) == "198.18.2.10");
}

TEST_CASE("expand_actor: jitter is seeded and per-actor") {
    auto config = sim::load_scenario(kConfDir + "/scenarios/three_families_noise.json");
    REQUIRE(config.families.size() == 4);
    const size_t noise = 3;
    auto a0 = sim::expand_actor(config, noise, 0, 9);
    auto a0_again = sim::expand_actor(config, noise, 0, 9);
    auto a1 = sim::expand_actor(config, noise, 1, 9);
    auto a0_other_seed = sim::expand_actor(config, noise, 0, 10);

    CHECK(a0.steps.size() == 10);
    for (size_t i = 0; i < a0.steps.size(); ++i) {
        CHECK(a0.steps[i].command == a0_again.steps[i].command);
        CHECK(a0.steps[i].command.find("${jit}") == std::string::npos);
    }
    CHECK(a0.delays_ms == a0_again.delays_ms);
    // fixed steps match across actors, jittered ones differ
    CHECK(a0.steps[0].command == a1.steps[0].command);
    CHECK(a0.steps[8].command != a1.steps[8].command);
    CHECK(a0.steps[9].command != a1.steps[9].command);
    CHECK(a0.steps[8].command != a0_other_seed.steps[8].command);
    // the placeholder became exactly eight hex digits
    std::string c = a0.steps[9].command;  // "/bin/busybox <tok>"
    std::string tok = c.substr(c.find_last_of(' ') + 1);
    CHECK(tok.size() == 8);
    CHECK(tok.find_first_not_of("0123456789abcdef") == std::string::npos);

    // jitter-free families expand to their literal scripts
    auto m0 = sim::expand_actor(config, 0, 3, 9);
    CHECK(m0.steps[0].command == config.families[0].steps[0].command);
    CHECK(m0.ip == "198.18.0.4");
}

TEST_CASE("build_manifest: three families ground truth") {
    auto manifest = sim::build_manifest(three_families(), 7);
    CHECK(manifest.scenario == "three-families");
    CHECK(manifest.seed == 7);
    CHECK(manifest.complete);
    REQUIRE(manifest.actors.size() == 30);
    CHECK(manifest.actors[0] == std::pair<std::string, std::string>{"198.18.0.1", "mirai-like"});
    CHECK(manifest.actors[29] == std::pair<std::string, std::string>{"198.18.2.10", "installer"});

    REQUIRE(manifest.family_commands.size() == 3);
    for (const auto& [family, commands] : manifest.family_commands) {
        CHECK(commands.size() == 10);
    }
    CHECK(manifest.family_goals.at("mirai-like") ==
          std::vector<std::string>{"Honeypot Fingerprinting", "Malicious Installation"});
    CHECK(manifest.family_goals.at("intel-recon") ==
          std::vector<std::string>{"System Intelligence", "CPU Intelligence",
                                   "Resource Capture/Extraction", "GPU intelligence"});
    CHECK(manifest.family_goals.at("installer") ==
          std::vector<std::string>{"Malicious Installation"});

    // one exact-match pattern per family: all ten commands, all ten actors
    REQUIRE(manifest.expected_patterns.size() == 3);
    for (const auto& p : manifest.expected_patterns) {
        CHECK(p.commands.size() == 10);
        REQUIRE(p.supporters.size() == 10);
        std::string family = manifest.family_commands.at("mirai-like") == p.commands
                                 ? "mirai-like"
                             : manifest.family_commands.at("intel-recon") == p.commands
                                 ? "intel-recon"
                                 : "installer";
        CHECK(manifest.family_commands.at(family) == p.commands);
        for (const auto& ip : p.supporters) {
            auto it = std::find_if(manifest.actors.begin(), manifest.actors.end(),
                                   [&](const auto& a) { return a.first == ip; });
            REQUIRE(it != manifest.actors.end());
            CHECK(it->second == family);
        }
    }
}

TEST_CASE("build_manifest: noise actors stay below the pattern thresholds") {
    auto config = sim::load_scenario(kConfDir + "/scenarios/three_families_noise.json");
    auto manifest = sim::build_manifest(config, 7);
    CHECK(manifest.actors.size() == 34);
    // noise actors share only 8 fixed commands pairwise, under min_clusters=10
    CHECK(manifest.expected_patterns.size() == 3);
    for (const auto& p : manifest.expected_patterns) {
        for (const auto& ip : p.supporters) CHECK(ip.rfind("198.18.3.", 0) == std::string::npos);
    }
}

TEST_CASE("build_manifest: camera family expectations") {
    auto config = sim::load_scenario(kConfDir + "/scenarios/mixed_probe.json");
    auto manifest = sim::build_manifest(config, 1);
    CHECK(manifest.actors.size() == 5);
    CHECK(manifest.family_requests.at("camera-exploiter").size() == 10);
    CHECK(manifest.family_attack_types.at("camera-exploiter") ==
          std::vector<std::string>{
              "CVE-2018-9995 bypass",
              "Foscam IP Camera - Bypass Authentication",
              "Hikvision IP Camera - Bypass Authentication",
              "IP Camera - Shellshock",
              "Malicious Activity",
              "Netwave IP Camera - Password Disclosure",
              "[CVE-2013-1599] DLINK Camera",
              "camera credential brute-force",
          });
    // two distinct scanner commands cannot reach min_clusters=10
    CHECK(manifest.expected_patterns.empty());
    CHECK(manifest.family_commands.at("credential-scanner").size() == 2);
}

TEST_CASE("manifest json round trip") {
    TempDir tmp;
    auto manifest = sim::build_manifest(three_families(), 42);
    manifest.errors.push_back("actor 198.18.0.1: induced note [mirai-like]");
    manifest.complete = false;
    std::string path = (tmp.path() / "manifest.json").string();
    sim::write_manifest(path, manifest);
    auto back = sim::read_manifest(path);
    CHECK(back.scenario == manifest.scenario);
    CHECK(back.seed == manifest.seed);
    CHECK(back.complete == manifest.complete);
    CHECK(back.errors == manifest.errors);
    CHECK(back.actors == manifest.actors);
    CHECK(back.family_commands == manifest.family_commands);
    CHECK(back.family_requests == manifest.family_requests);
    CHECK(back.family_attack_types == manifest.family_attack_types);
    CHECK(back.family_goals == manifest.family_goals);
    CHECK(back.min_actors == manifest.min_actors);
    CHECK(back.min_clusters == manifest.min_clusters);
    REQUIRE(back.expected_patterns.size() == manifest.expected_patterns.size());
    for (size_t i = 0; i < back.expected_patterns.size(); ++i) {
        CHECK(back.expected_patterns[i].commands == manifest.expected_patterns[i].commands);
        CHECK(back.expected_patterns[i].supporters == manifest.expected_patterns[i].supporters);
    }
}

TEST_CASE("run_scenario demands the targets its families need") {
    auto config = three_families();
    CHECK_THROWS_AS(sim::run_scenario(config, std::nullopt, std::nullopt, 7), ValidationError);
}

TEST_CASE("live scenario: thirty actors, reruns agree modulo timing") {
    auto config = three_families();
    auto shell_config = shell::load_shell_config(kConfDir + "/shell.json");

    auto run_once = [&]() {
        LiveShell live(shell_config);
        auto manifest = sim::run_scenario(config, live.endpoint(), std::nullopt, 7);
        REQUIRE_MESSAGE(manifest.complete, util::join(manifest.errors, "; "));
        return sim::canonical_transcript(live.sink->snapshot());
    };
    std::string first = run_once();
    std::string second = run_once();
    CHECK(first == second);
    CHECK_FALSE(first.empty());

    {
        LiveShell live(shell_config);
        auto manifest = sim::run_scenario(config, live.endpoint(), std::nullopt, 7);
        REQUIRE(manifest.complete);
        CHECK(manifest.actors.size() == 30);
        auto events = live.sink->snapshot();
        CHECK(count_kind(events, events::EventKind::Connect) == 30);
        CHECK(count_kind(events, events::EventKind::Command) == 300);
        CHECK(count_kind(events, events::EventKind::LoginSuccess) == 30);
        CHECK(count_kind(events, events::EventKind::Disconnect) == 30);
        auto actors = events::build_actor_index(events::sessionize(events));
        REQUIRE(actors.size() == 30);
        for (const auto& [ip, family] : manifest.actors) {
            REQUIRE(actors.count(ip) == 1);
            CHECK(actors.at(ip).commands.size() == 10);
        }
        // every emitted command matches the manifest vocabulary of its family
        for (const auto& [ip, family] : manifest.actors) {
            const auto& vocab = manifest.family_commands.at(family);
            for (const auto& cmd : actors.at(ip).commands) {
                CHECK(std::find(vocab.begin(), vocab.end(), cmd) != vocab.end());
            }
        }
    }
}

TEST_CASE("live scenario: camera probes land with attack types and firmware") {
    LiveCamera live;
    sim::ScenarioConfig config;
    config.name = "camera-live";
    sim::BotScript fam;
    fam.family = "camera-exploiter";
    fam.target = sim::Target::Camera;
    fam.actors = 2;
    fam.steps.push_back({"GET /device.rsp?opt=user&cmd=list", "", {{"Cookie", "uid=admin"}}, ""});
    fam.steps.push_back({"GET /cgi-bin/snapshot.cgi?user=admin&pwd=anko", "", {}, ""});
    std::string auth = "Basic " + util::base64_encode("admin:" + live.profile.password);
    fam.steps.push_back({"POST /upgrade.cgi", "", {{"Authorization", auth}}, "NOT-A-REAL-FW"});
    config.families.push_back(fam);

    auto manifest = sim::run_scenario(config, std::nullopt, live.endpoint(), 3);
    REQUIRE_MESSAGE(manifest.complete, util::join(manifest.errors, "; "));
    CHECK(manifest.family_attack_types.at("camera-exploiter") ==
          std::vector<std::string>{"CVE-2018-9995 bypass", "camera credential brute-force"});

    // per actor: three sessions of connect/request/disconnect plus one
    // download record for the upload step
    REQUIRE(testnet::wait_for_events(*live.sink, 20, 5000));
    auto events = live.sink->snapshot();
    std::set<std::string> ips;
    std::map<std::string, int> attack_counts;
    for (const auto& e : events) {
        ips.insert(e.src_ip);
        if (e.kind == events::EventKind::HttpRequest) {
            auto it = e.payload.find("attack_type");
            if (it != e.payload.end()) ++attack_counts[it->second];
        }
    }
    CHECK(ips == std::set<std::string>{"198.18.0.1", "198.18.0.2"});
    CHECK(attack_counts["CVE-2018-9995 bypass"] == 2);
    CHECK(attack_counts["camera credential brute-force"] == 2);
    CHECK(count_kind(events, events::EventKind::DownloadAttempt) == 2);
    // both actors uploaded identical bytes: one artifact, hash-addressed
    std::string sha = util::sha256_hex("NOT-A-REAL-FW");
    std::ifstream bin(live.profile.artifacts_dir + "/" + sha + ".bin", std::ios::binary);
    REQUIRE(bin.good());
    std::string stored((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    CHECK(stored == "NOT-A-REAL-FW");
}

TEST_CASE("live scenario: dead target yields a partial manifest, not a throw") {
    uint16_t dead_port;
    {
        netio::TcpListener listener("127.0.0.1", 0);
        dead_port = listener.port();
    }
    sim::ScenarioConfig config;
    config.name = "doomed";
    sim::BotScript fam;
    fam.family = "mirai-like";
    fam.target = sim::Target::Shell;
    fam.actors = 2;
    fam.credentials.push_back({"root", "root"});
    fam.steps.push_back({"uname -a", "", {}, ""});
    config.families.push_back(fam);

    auto manifest = sim::run_scenario(config, sim::Endpoint{"127.0.0.1", dead_port}, std::nullopt, 1);
    CHECK_FALSE(manifest.complete);
    REQUIRE(manifest.errors.size() == 2);
    CHECK(util::contains(manifest.errors[0], "198.18.0.1"));
    CHECK(util::contains(manifest.errors[0], "[mirai-like]"));
    CHECK(manifest.actors.size() == 2);  // ground truth still present
}

TEST_CASE("canonical transcript drops timing and renames sessions") {
    std::vector<events::Event> evs;
    auto mk = [](const char* ip, const char* session, util::Millis ts, events::EventKind kind) {
        events::Event e;
        e.ts = ts;
        e.src_ip = ip;
        e.src_port = 40000 + static_cast<int>(ts % 1000);
        e.honeypot_id = "honeyshell";
        e.session = session;
        e.kind = kind;
        if (kind == events::EventKind::Command) e.payload["input"] = "uname -a";
        if (kind == events::EventKind::Disconnect) e.payload["reason"] = "eof";
        return e;
    };
    evs.push_back(mk("198.18.0.2", "s1", 100, events::EventKind::Connect));
    evs.push_back(mk("198.18.0.1", "s2", 150, events::EventKind::Connect));
    evs.push_back(mk("198.18.0.1", "s2", 160, events::EventKind::Disconnect));
    evs.push_back(mk("198.18.0.1", "s3", 170, events::EventKind::Connect));
    evs.push_back(mk("198.18.0.2", "s1", 180, events::EventKind::Command));

    std::string t = sim::canonical_transcript(evs);
    // same content, different wall clock, different session ids, shuffled
    std::vector<events::Event> evs2;
    evs2.push_back(mk("198.18.0.1", "z9", 4150, events::EventKind::Connect));
    evs2.push_back(mk("198.18.0.2", "z7", 4100, events::EventKind::Connect));
    evs2.push_back(mk("198.18.0.2", "z7", 4180, events::EventKind::Command));
    evs2.push_back(mk("198.18.0.1", "z9", 4160, events::EventKind::Disconnect));
    evs2.push_back(mk("198.18.0.1", "z5", 4170, events::EventKind::Connect));
    CHECK(t == sim::canonical_transcript(evs2));
    CHECK(util::contains(t, "\"conn\":1"));
    CHECK_FALSE(util::contains(t, "\"ts\""));
    CHECK_FALSE(util::contains(t, "s1"));
}

TEST_CASE("fingerprint_probe: shipped config passes every check") {
    auto shell_config = shell::load_shell_config(kConfDir + "/shell.json");
    LiveShell live(shell_config, false);
    auto report = sim::fingerprint_probe("127.0.0.1", live.server->port());
    REQUIRE(report.complete);
    REQUIRE(report.checks.size() == 5);
    for (const auto& c : report.checks) {
        CHECK_MESSAGE(c.passed, c.name, ": ", c.detail);
    }
    CHECK(report.all_passed());
    CHECK(report.checks[0].name == "banner_plausibility");
    CHECK(report.checks[1].name == "file_response");
    CHECK(report.checks[2].name == "uname_consistency");
    CHECK(report.checks[3].name == "unknown_command_shape");
    CHECK(report.checks[4].name == "timing_sanity");
}

TEST_CASE("fingerprint_probe: removing the file entry fails that check") {
    auto shell_config = shell::load_shell_config(kConfDir + "/shell.json");
    std::erase_if(shell_config.command_table, [](const shell::CommandRule& r) {
        return r.pattern == "file /bin/busybox";
    });
    LiveShell live(shell_config, false);
    auto report = sim::fingerprint_probe("127.0.0.1", live.server->port());
    REQUIRE(report.complete);
    CHECK_FALSE(report.all_passed());
    int failed = 0;
    for (const auto& c : report.checks) {
        if (!c.passed) {
            ++failed;
            CHECK(c.name == "file_response");
        }
    }
    CHECK(failed == 1);
}

TEST_CASE("fingerprint_probe: a leaky banner is called out") {
    auto shell_config = shell::load_shell_config(kConfDir + "/shell.json");
    shell_config.banner = "wifi-cam honeypot build 7";
    LiveShell live(shell_config, false);
    auto report = sim::fingerprint_probe("127.0.0.1", live.server->port());
    REQUIRE(report.complete);
    CHECK_FALSE(report.checks[0].passed);
    CHECK(util::contains(report.checks[0].detail, "honeypot"));
}

TEST_CASE("fingerprint_probe: impossible latency budget fails timing") {
    auto shell_config = shell::load_shell_config(kConfDir + "/shell.json");
    LiveShell live(shell_config, false);
    sim::VetOptions opts;
    opts.max_rtt_ms = -1;
    auto report = sim::fingerprint_probe("127.0.0.1", live.server->port(), opts);
    REQUIRE(report.complete);
    CHECK_FALSE(report.checks[4].passed);
}

TEST_CASE("fingerprint_probe: closed port reports incomplete") {
    uint16_t dead_port;
    {
        netio::TcpListener listener("127.0.0.1", 0);
        dead_port = listener.port();
    }
    auto report = sim::fingerprint_probe("127.0.0.1", dead_port);
    CHECK_FALSE(report.complete);
    CHECK(report.checks.empty());
    CHECK_FALSE(report.all_passed());
}
