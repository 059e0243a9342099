#include "ssal/log.hpp"

#include <atomic>
#include <iostream>

namespace ssal {

namespace {
std::atomic<bool> g_enabled{true};
}

void warn(const std::string& message) {
  if (g_enabled.load(std::memory_order_relaxed)) {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_warnings_enabled(bool enabled) { g_enabled.store(enabled, std::memory_order_relaxed); }

}  // namespace ssal
