#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace flowda::log {

using Sink = std::function<void(const std::string&)>;

// Structured one-line records: "event=<name> key=value ...". The sink is
// process-global; tests leave it unset, the CLI points it at stderr.
void set_sink(Sink sink);
void record(const std::string& event,
            const std::vector<std::pair<std::string, std::string>>& fields);

}  // namespace flowda::log
