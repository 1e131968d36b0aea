#include "gwcusum/laws.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gwcusum/errors.hpp"

namespace gwcusum {

std::string to_string(LawKind kind) {
  switch (kind) {
    case LawKind::Bernoulli:
      return "bernoulli";
    case LawKind::Poisson:
      return "poisson";
    case LawKind::Degenerate:
      return "degenerate";
    case LawKind::FinitePmf:
      return "pmf";
  }
  return "unknown";
}

Law Law::bernoulli(double prob) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw InvalidParameter("bernoulli probability must lie in [0, 1], got " + std::to_string(prob));
  }
  Law law;
  law.kind_ = LawKind::Bernoulli;
  law.param_ = prob;
  const double q = 1.0 - prob;
  law.mean_ = prob;
  law.m2_ = prob * q;
  law.m3_ = prob * q * (1.0 - 2.0 * prob);
  law.m4_ = prob * q * (1.0 - 3.0 * prob + 3.0 * prob * prob);
  return law;
}

Law Law::poisson(double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw InvalidParameter("poisson rate must be finite and nonnegative, got " + std::to_string(rate));
  }
  Law law;
  law.kind_ = LawKind::Poisson;
  law.param_ = rate;
  law.mean_ = rate;
  law.m2_ = rate;
  law.m3_ = rate;
  law.m4_ = 3.0 * rate * rate + rate;
  return law;
}

Law Law::degenerate(std::int64_t value) {
  if (value < 0) {
    throw InvalidParameter("degenerate value must be nonnegative, got " + std::to_string(value));
  }
  Law law;
  law.kind_ = LawKind::Degenerate;
  law.value_ = value;
  law.mean_ = static_cast<double>(value);
  return law;
}

Law Law::finite_pmf(std::vector<double> probs) {
  if (probs.empty()) throw InvalidParameter("pmf needs at least one probability");
  for (double pk : probs) {
    if (!(pk >= 0.0) || !std::isfinite(pk)) throw InvalidParameter("pmf probabilities must be nonnegative");
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidParameter("pmf probabilities must sum to 1, got " + std::to_string(total));
  }
  Law law;
  law.kind_ = LawKind::FinitePmf;
  double mean = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) mean += static_cast<double>(k) * probs[k];
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double d = static_cast<double>(k) - mean;
    const double d2 = d * d;
    m2 += d2 * probs[k];
    m3 += d2 * d * probs[k];
    m4 += d2 * d2 * probs[k];
  }
  law.mean_ = mean;
  law.m2_ = m2;
  law.m3_ = m3;
  law.m4_ = m4;
  law.cdf_.resize(probs.size());
  std::partial_sum(probs.begin(), probs.end(), law.cdf_.begin());
  law.cdf_.back() = 1.0;
  law.probs_ = std::move(probs);
  return law;
}

bool operator==(const Law& a, const Law& b) {
  return a.kind_ == b.kind_ && a.param_ == b.param_ && a.value_ == b.value_ && a.probs_ == b.probs_;
}

Law make_law(LawKind kind, const std::vector<double>& params) {
  switch (kind) {
    case LawKind::FinitePmf:
      return Law::finite_pmf(params);
    default:
      break;
  }
  if (params.size() != 1) {
    throw InvalidParameter(to_string(kind) + " law takes exactly one parameter");
  }
  switch (kind) {
    case LawKind::Bernoulli:
      return Law::bernoulli(params[0]);
    case LawKind::Poisson:
      return Law::poisson(params[0]);
    case LawKind::Degenerate: {
      const double v = params[0];
      if (v != std::floor(v)) throw InvalidParameter("degenerate value must be an integer");
      return Law::degenerate(static_cast<std::int64_t>(v));
    }
    default:
      throw InvalidParameter("unsupported law kind");
  }
}

std::int64_t sample_sum(const Law& law, std::int64_t count, Rng& rng) {
  if (count <= 0) return 0;
  switch (law.kind_) {
    case LawKind::Degenerate:
      return count * law.value_;
    case LawKind::Bernoulli: {
      if (law.param_ == 0.0) return 0;
      if (law.param_ == 1.0) return count;
      std::binomial_distribution<std::int64_t> dist(count, law.param_);
      return dist(rng);
    }
    case LawKind::Poisson: {
      const double rate = law.param_ * static_cast<double>(count);
      if (rate == 0.0) return 0;
      std::poisson_distribution<std::int64_t> dist(rate);
      return dist(rng);
    }
    case LawKind::FinitePmf: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      std::int64_t total = 0;
      for (std::int64_t c = 0; c < count; ++c) {
        const double u = unif(rng);
        const auto it = std::upper_bound(law.cdf_.begin(), law.cdf_.end(), u);
        total += std::min<std::int64_t>(it - law.cdf_.begin(),
                                        static_cast<std::int64_t>(law.cdf_.size()) - 1);
      }
      return total;
    }
  }
  return 0;
}

}  // namespace gwcusum
