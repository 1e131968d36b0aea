#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gwcusum/rng.hpp"

namespace gwcusum {

enum class LawKind { Bernoulli, Poisson, Degenerate, FinitePmf };

[[nodiscard]] std::string to_string(LawKind kind);

/// Nonnegative integer-valued offspring or innovation law with cached exact moments.
///
/// Immutable after construction. Construct through the named factories or
/// make_law(); both validate parameters and throw InvalidParameter.
class Law {
 public:
  [[nodiscard]] static Law bernoulli(double prob);
  [[nodiscard]] static Law poisson(double rate);
  [[nodiscard]] static Law degenerate(std::int64_t value);
  [[nodiscard]] static Law finite_pmf(std::vector<double> probs);

  [[nodiscard]] LawKind kind() const noexcept { return kind_; }
  /// Success probability (Bernoulli) or rate (Poisson); 0 otherwise.
  [[nodiscard]] double parameter() const noexcept { return param_; }
  [[nodiscard]] std::int64_t value() const noexcept { return value_; }
  [[nodiscard]] const std::vector<double>& probabilities() const noexcept { return probs_; }

  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double variance() const noexcept { return m2_; }
  [[nodiscard]] double third_central() const noexcept { return m3_; }
  [[nodiscard]] double fourth_central() const noexcept { return m4_; }

  [[nodiscard]] bool is_degenerate() const noexcept { return m2_ == 0.0; }

  friend bool operator==(const Law& a, const Law& b);

 private:
  Law() = default;

  LawKind kind_ = LawKind::Degenerate;
  double param_ = 0.0;
  std::int64_t value_ = 0;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;

  friend std::int64_t sample_sum(const Law& law, std::int64_t count, Rng& rng);
};

/// Generic factory: Bernoulli and Poisson read params[0]; Degenerate reads params[0]
/// as a nonnegative integer; FinitePmf takes params as the probabilities over 0..K.
[[nodiscard]] Law make_law(LawKind kind, const std::vector<double>& params);

/// Sum of `count` i.i.d. draws from `law`.
[[nodiscard]] std::int64_t sample_sum(const Law& law, std::int64_t count, Rng& rng);

[[nodiscard]] inline std::int64_t draw(const Law& law, Rng& rng) { return sample_sum(law, 1, rng); }

}  // namespace gwcusum
