#include "analytics/tokenize.hpp"

#include "util/errors.hpp"
#include "util/strings.hpp"

namespace iothp::analytics {

std::vector<std::string> tokenize(const std::string& command) {
    std::vector<std::string> tokens = util::split_ws(command);
    if (tokens.empty()) throw ValidationError("cannot tokenize blank command");
    return tokens;
}

TokenVector token_vector(const std::string& command) {
    TokenVector v;
    v.command = command;
    for (const std::string& t : tokenize(command)) ++v.counts[t];
    return v;
}

}  // namespace iothp::analytics
