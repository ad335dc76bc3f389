#pragma once

#include <optional>

namespace hede {

/// Cap the number of OpenMP workers used by the grid loops. Results never
/// depend on this value: parallel loops write into per-index slots and all
/// reductions run sequentially in index order.
void set_thread_count(int threads);

int thread_count();

/// Resolve a thread request: explicit flag, then the HEDE_THREADS variable.
std::optional<int> resolve_thread_request(std::optional<int> flag);

} // namespace hede
