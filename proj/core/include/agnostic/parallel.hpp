#pragma once

#include <cstddef>
#include <functional>

namespace agnostic {

/// Worker cap: HARNESS_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, count) over up to worker_count() threads using
/// static contiguous chunks. Bodies must write only to slot i of their outputs;
/// any reduction happens afterwards on the caller's thread, so results do not
/// depend on the number of workers. The first exception thrown (lowest index)
/// is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace agnostic
