#include "lsde/parallel.hpp"

#include <cstdlib>
#include <string>

namespace lsde {

std::size_t parallelism_degree() {
  if (const char* env = std::getenv("LSDE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

}  // namespace lsde
