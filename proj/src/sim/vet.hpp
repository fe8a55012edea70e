#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace iothp::sim {

// Credentials the prober logs in with; vetting your own honeypot means you
// know a working pair.
struct VetOptions {
    std::string username = "root";
    std::string password = "root";
    int io_timeout_ms = 5000;
    int max_rtt_ms = 500;  // slowest acceptable command round trip
};

struct VetCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Attacker's-eye checklist. complete=false means the target was unreachable
// and no verdicts exist; a reachable target always yields all five checks.
struct VetReport {
    bool complete = false;
    std::vector<VetCheck> checks;

    bool all_passed() const;
};

// Probes a running shell honeypot the way a cautious intruder would: banner
// plausibility, `file` responding, `uname -a` consistent with the busybox
// persona, unknown-command error shape, and response timing.
VetReport fingerprint_probe(const std::string& host, uint16_t port, const VetOptions& opts = {});

}  // namespace iothp::sim
