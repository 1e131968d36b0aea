#include "gwcusum/simulate.hpp"

namespace gwcusum {

namespace {

void check_start(const ModelSpec& spec, const CountVector& x0) {
  if (static_cast<std::size_t>(x0.size()) != spec.types()) {
    throw InvalidParameter("initial state has " + std::to_string(x0.size()) + " components, model has " +
                           std::to_string(spec.types()));
  }
  if ((x0.array() < 0).any()) throw InvalidParameter("initial state must be nonnegative");
}

}  // namespace

Trajectory Trajectory::slice(std::size_t first, std::size_t last) const {
  if (first > last || last >= observations.size()) throw RangeError("trajectory slice out of range");
  Trajectory out;
  out.p = p;
  out.observations.assign(observations.begin() + static_cast<std::ptrdiff_t>(first),
                          observations.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  out.seed = seed;
  return out;
}

CountVector step(const ModelSpec& spec, const CountVector& x_prev, Rng& rng) {
  const std::size_t p = spec.types();
  CountVector next(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    std::int64_t total = 0;
    for (std::size_t i = 0; i < p; ++i) {
      total += sample_sum(spec.offspring(j, i), x_prev(static_cast<Eigen::Index>(i)), rng);
    }
    total += draw(spec.innovation(j), rng);
    next(static_cast<Eigen::Index>(j)) = total;
  }
  return next;
}

Trajectory simulate(const ModelSpec& spec, const CountVector& x0, std::size_t n_steps, Rng& rng,
                    std::size_t burn_in) {
  check_start(spec, x0);
  CountVector x = x0;
  for (std::size_t b = 0; b < burn_in; ++b) x = step(spec, x, rng);

  Trajectory out;
  out.p = spec.types();
  out.observations.reserve(n_steps + 1);
  out.observations.push_back(x);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    x = step(spec, x, rng);
    out.observations.push_back(x);
  }
  return out;
}

Trajectory simulate_with_change(const ModelSpec& spec0, const ModelSpec& spec_star, std::size_t m,
                                std::size_t k_star, std::size_t horizon, const CountVector& x0, Rng& rng) {
  if (spec0.types() != spec_star.types()) throw InvalidParameter("pre- and post-change models differ in p");
  if (m == 0) throw InvalidParameter("training length must be at least 1");
  if (k_star == 0) throw InvalidParameter("change index k* must be at least 1");
  if (horizon < m + k_star) throw InvalidParameter("horizon must be at least m + k*");
  check_start(spec0, x0);

  Trajectory out;
  out.p = spec0.types();
  out.training_length = m;
  out.change_index = k_star;
  out.observations.reserve(horizon + 1);
  out.observations.push_back(x0);
  CountVector x = x0;
  const std::size_t first_changed = m + k_star;
  for (std::size_t n = 1; n <= horizon; ++n) {
    x = step(n < first_changed ? spec0 : spec_star, x, rng);
    out.observations.push_back(x);
  }
  return out;
}

}  // namespace gwcusum
