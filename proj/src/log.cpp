#include "flowda/log.hpp"

#include <mutex>

namespace flowda::log {

namespace {
std::mutex g_mutex;
Sink g_sink;
}  // namespace

void set_sink(Sink sink) {
  std::lock_guard<std::mutex> lock(g_mutex);
  g_sink = std::move(sink);
}

void record(const std::string& event,
            const std::vector<std::pair<std::string, std::string>>& fields) {
  std::lock_guard<std::mutex> lock(g_mutex);
  if (!g_sink) return;
  std::string line = "event=" + event;
  for (const auto& [key, value] : fields) {
    line += ' ';
    line += key;
    line += '=';
    line += value;
  }
  g_sink(line);
}

}  // namespace flowda::log
