#include "gwcusum/model.hpp"

#include <numeric>
#include <string>

namespace gwcusum {

ModelSpec::ModelSpec(std::size_t p, std::vector<Law> offspring_row_major, std::vector<Law> innovation)
    : p_(p), offspring_(std::move(offspring_row_major)), innovation_(std::move(innovation)) {
  if (p_ == 0) throw InvalidParameter("model needs at least one type");
  if (offspring_.size() != p_ * p_) {
    throw InvalidParameter("offspring grid must have p*p = " + std::to_string(p_ * p_) + " laws");
  }
  if (innovation_.size() != p_) throw InvalidParameter("innovation vector must have p laws");
}

MomentSet build_moments(const ModelSpec& spec) {
  const auto p = static_cast<Eigen::Index>(spec.types());
  MomentSet out;
  out.mu.resize(p, p + 1);
  out.V.resize(p, p + 1);
  out.A.resize(p, p + 1);
  out.B.resize(p, p + 1);
  auto fill = [&](Eigen::Index row, Eigen::Index col, const Law& law) {
    out.mu(row, col) = law.mean();
    out.V(row, col) = law.variance();
    out.A(row, col) = law.third_central();
    out.B(row, col) = law.fourth_central();
  };
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) {
      fill(j, i, spec.offspring(static_cast<std::size_t>(j), static_cast<std::size_t>(i)));
    }
    fill(j, p, spec.innovation(static_cast<std::size_t>(j)));
  }
  out.m = out.mu.leftCols(p);
  return out;
}

void assert_stable(const ModelSpec& spec, double margin) {
  const double rho = spectral_radius(build_moments(spec).m);
  if (!(rho < 1.0 - margin)) {
    throw Unstable("offspring mean matrix has spectral radius " + std::to_string(rho) + " >= 1", rho);
  }
}

IndexSet reduction_set(const ModelSpec& spec) {
  const MomentSet moments = build_moments(spec);
  IndexSet r;
  for (Eigen::Index i = 0; i < moments.V.rows(); ++i) {
    if ((moments.V.row(i).array() != 0.0).any()) r.push_back(static_cast<std::size_t>(i));
  }
  if (r.empty()) throw EmptyReduction("every type is deterministic given the past; nothing to monitor");
  return r;
}

void validate(const GinarSpec& g) {
  if (g.zeta.empty()) throw InvalidParameter("GINAR order must be at least 1");
  if (!(g.zeta.back().mean() > 0.0)) {
    throw InvalidParameter("GINAR offspring law of the highest lag must have positive mean");
  }
  if (!g.init.empty() && g.init.size() != g.zeta.size()) {
    throw InvalidParameter("GINAR init must list exactly `order` values");
  }
  for (auto z : g.init) {
    if (z < 0) throw InvalidParameter("GINAR initial values must be nonnegative");
  }
}

EmbeddedGinar ginar_embed(const GinarSpec& g) {
  validate(g);
  const std::size_t p = g.order();
  std::vector<Law> offspring(p * p, Law::degenerate(0));
  for (std::size_t i = 0; i < p; ++i) {
    offspring[0 * p + i] = g.zeta[i];
    if (i + 1 < p) offspring[(i + 1) * p + i] = Law::degenerate(1);
  }
  std::vector<Law> innovation(p, Law::degenerate(0));
  innovation[0] = g.eta;

  CountVector x0 = CountVector::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < g.init.size(); ++i) x0(static_cast<Eigen::Index>(i)) = g.init[i];
  return {ModelSpec(p, std::move(offspring), std::move(innovation)), std::move(x0)};
}

}  // namespace gwcusum
