#pragma once

#include <cstddef>
#include <functional>

namespace mno {

/// Worker count: hardware concurrency capped by the MNO_THREADS environment variable.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index is handled by exactly one worker; the first
/// exception thrown is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mno
