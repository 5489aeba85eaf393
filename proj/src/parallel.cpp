#include "rrl/parallel.hpp"

#include <cstdlib>
#include <string>

namespace rrl {

int resolve_workers(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("REPLICABLE_RL_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace rrl
