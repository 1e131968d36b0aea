#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace gwcusum {

using Rng = std::mt19937_64;

/// Deterministic child seed for stream `index` of a run seeded with `master`.
/// SplitMix64 finalizer over the pair; distinct indices give decorrelated streams.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

[[nodiscard]] inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

/// Runs body(i) for i in [0, count) on up to hardware_concurrency threads.
/// Work items must write only to their own slots; results do not depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace gwcusum
