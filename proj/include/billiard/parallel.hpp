#pragma once

#include <cstdint>
#include <omp.h>

namespace billiard {

enum class ExecPolicy { serial, openmp };

// Runs body(i) for i in [0, count). The OpenMP path writes into per-index
// slots only, so results are identical to the serial reference for any
// thread count. workers == 0 means the OpenMP runtime default.
template <typename Body>
void for_each_index(std::int64_t count, ExecPolicy policy, int workers, Body&& body) {
    if (policy == ExecPolicy::serial || count < 2) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }
    if (workers > 0) {
#pragma omp parallel for schedule(dynamic, 16) num_threads(workers)
        for (std::int64_t i = 0; i < count; ++i) body(i);
    } else {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < count; ++i) body(i);
    }
}

} // namespace billiard
