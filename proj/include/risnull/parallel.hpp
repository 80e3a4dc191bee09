#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace risnull {

/// splitmix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Seed of trial `trial_index` at grid point `point_index`. For a fixed
/// master the map is injective over point, trial < 2^32.
std::uint64_t derive_trial_seed(std::uint64_t master, std::uint64_t point_index,
                                std::uint64_t trial_index);

/// RISNULL_WORKERS if set and positive, else hardware concurrency (>= 1).
int default_worker_count();

/// Runs body(i) for i in [0, count) on `workers` threads. Each index is
/// processed exactly once; callers write results into slot i so the
/// outcome does not depend on scheduling.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace risnull
