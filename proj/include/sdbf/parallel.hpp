#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace sdbf {

/// Worker cap: SDBF_THREADS when set to a positive integer, else the hardware concurrency.
std::size_t worker_limit();

/// Runs independent tasks on at most worker_limit() threads and rethrows the
/// first exception (by task index) after all tasks finish. Each task must own
/// its random stream so results do not depend on scheduling.
void run_tasks(const std::vector<std::function<void()>>& tasks);

}  // namespace sdbf
