#include "fdrsmooth/errors.hpp"

#include <atomic>
#include <iostream>

namespace fdrsmooth {
namespace {

void default_handler(const std::string& message) {
  std::cerr << "fdrsmooth: warning: " << message << '\n';
}

std::atomic<WarningHandler> g_handler{&default_handler};

}  // namespace

void set_warning_handler(WarningHandler handler) {
  g_handler.store(handler != nullptr ? handler : &default_handler);
}

void warn(const std::string& message) { g_handler.load()(message); }

}  // namespace fdrsmooth
