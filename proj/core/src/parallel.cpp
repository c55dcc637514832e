#include "dsm/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace dsm {

int default_workers() {
  if (const char* env = std::getenv("DSM_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

}  // namespace dsm
