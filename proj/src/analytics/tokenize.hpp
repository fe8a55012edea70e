#pragma once

#include <map>
#include <string>
#include <vector>

namespace iothp::analytics {

// Tokenizer identity, recorded in run manifests. ws-v1: split on runs of
// whitespace, tokens kept verbatim (pipes, flags and URLs are tokens), case
// preserved. Changing the rules means a new version string.
inline constexpr const char* kTokenizerVersion = "ws-v1";

// Throws ValidationError on blank / whitespace-only input.
std::vector<std::string> tokenize(const std::string& command);

// Token-count vector of one command string.
struct TokenVector {
    std::string command;
    std::map<std::string, int> counts;
};

TokenVector token_vector(const std::string& command);

}  // namespace iothp::analytics
