#include "wickbench/parallel.hpp"

#include <cstdlib>
#include <string>

namespace wb {

int default_workers() {
    if (const char* env = std::getenv("WICKBENCH_WORKERS")) {
        try {
            int k = std::stoi(env);
            if (k > 0) return k;
        } catch (...) {
        }
    }
    return 1;
}

}  // namespace wb
