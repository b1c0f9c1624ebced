#pragma once

#include <cstddef>
#include <functional>

namespace mfpg {

/// Worker count: MFPG_THREADS if set and positive, else hardware concurrency.
/// Read on every call.
unsigned worker_count();

/// Runs body(i) for i in [0, n) over static contiguous chunks. Bodies must
/// write only to their own slots; reductions belong to the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mfpg
