#pragma once

#include <cstddef>
#include <functional>

namespace seqquant {

/// Runs task(i) for i in [0, n) on up to `threads` workers. Tasks must write
/// disjoint outputs; scheduling order never affects results.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& task);

/// Worker count used when an options struct asks for 0 (= hardware threads).
int resolve_threads(int requested);

}  // namespace seqquant
