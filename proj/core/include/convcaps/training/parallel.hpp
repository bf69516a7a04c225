#pragma once

#include <cstddef>
#include <functional>

namespace convcaps::training {

/// Worker count to use when a config asks for 0 (= all hardware threads).
std::size_t resolve_threads(std::size_t requested);

/// Runs body(index, worker) for every index in [0, count) on up to `threads`
/// workers with dynamic scheduling. The first exception thrown by any body is
/// rethrown on the calling thread.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t index, std::size_t worker)>& body);

}  // namespace convcaps::training
