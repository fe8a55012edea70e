#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "events/event.hpp"
#include "sim/scenario.hpp"

namespace iothp::sim {

struct Endpoint {
    std::string host = "127.0.0.1";
    uint16_t port = 0;
};

struct RunOptions {
    int io_timeout_ms = 5000;  // per read/connect, not per scenario
};

// Drives every configured actor against live honeypots, concurrently, each
// actor tagged with its synthetic source address (the shell server must run
// with test_source_tags, the camera server with trust_forwarded_for).
// Connection failures do not throw: the affected actor stops, the manifest
// comes back with complete=false and one error note per failed actor, and
// whatever the honeypots logged so far stands as a partial transcript.
ScenarioManifest run_scenario(const ScenarioConfig& config, const std::optional<Endpoint>& shell,
                              const std::optional<Endpoint>& camera, uint64_t seed,
                              const RunOptions& opts = {});

// Rerun-comparable view of a scenario event log. Wall-clock artifacts are
// removed (timestamps, ephemeral ports, server-assigned session ids); each
// session becomes (actor ip, per-ip connection ordinal). Two runs of the
// same (config, seed) produce byte-identical transcripts.
std::string canonical_transcript(const std::vector<events::Event>& events);

}  // namespace iothp::sim
