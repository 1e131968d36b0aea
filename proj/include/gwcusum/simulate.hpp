#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwcusum/model.hpp"
#include "gwcusum/rng.hpp"

namespace gwcusum {

/// Observed or simulated path X_0, ..., X_N.
struct Trajectory {
  std::size_t p = 0;
  std::vector<CountVector> observations;
  /// Training length m; X_0..X_m are change-free.
  std::optional<std::size_t> training_length;
  /// Number of post-training steps before the change: generation m + k* is the first changed one.
  std::optional<std::size_t> change_index;
  std::optional<std::uint64_t> seed;

  [[nodiscard]] std::size_t last_index() const noexcept {
    return observations.empty() ? 0 : observations.size() - 1;
  }
  [[nodiscard]] const CountVector& operator[](std::size_t n) const { return observations[n]; }

  /// Copy of X_first..X_last, reindexed from 0.
  [[nodiscard]] Trajectory slice(std::size_t first, std::size_t last) const;
};

/// One generation: X_n[j] = sum_i sum_{k <= x_prev[i]} xi_{j,i} + eta_j.
[[nodiscard]] CountVector step(const ModelSpec& spec, const CountVector& x_prev, Rng& rng);

/// Path of length n_steps + 1 starting at x0 (after discarding `burn_in` generations).
[[nodiscard]] Trajectory simulate(const ModelSpec& spec, const CountVector& x0, std::size_t n_steps, Rng& rng,
                                  std::size_t burn_in = 0);

/// Generations 1..m+k*-1 follow spec0, generations m+k*..horizon follow spec_star.
[[nodiscard]] Trajectory simulate_with_change(const ModelSpec& spec0, const ModelSpec& spec_star, std::size_t m,
                                              std::size_t k_star, std::size_t horizon, const CountVector& x0,
                                              Rng& rng);

}  // namespace gwcusum
