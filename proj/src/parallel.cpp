#include "celltrack/parallel.hpp"

#include <cstdlib>
#include <string>

namespace celltrack {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CELLTRACK_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

}  // namespace celltrack
