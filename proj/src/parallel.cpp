#include "matchsim/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace matchsim {

std::size_t worker_count() {
  std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MATCHSIM_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) workers = static_cast<std::size_t>(cap);
    } catch (const std::exception&) {
      // unparsable value: ignore the cap
    }
  }
  return workers;
}

}  // namespace matchsim
