#include "fdrsafe/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "fdrsafe/dist.hpp"
#include "fdrsafe/rng.hpp"

namespace fdrsafe {

double norm_quantile(double p) {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return boost::math::quantile(dist, p);
}

double two_sided_pvalue(double u, const NullSpec& null_spec) {
  const double a = std::fabs(u);
  double p;
  if (null_spec.kind == NullKind::StandardNormal) {
    p = 2.0 * norm_sf(a);
  } else {
    const boost::math::students_t_distribution<double> dist(null_spec.df);
    p = 2.0 * boost::math::cdf(boost::math::complement(dist, a));
  }
  return std::clamp(p, 1e-300, 1.0);
}

std::vector<double> to_pvalues(const StatVector& u, const NullSpec& null_spec) {
  null_spec.validate();
  std::vector<double> p(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]))
      throw std::invalid_argument("to_pvalues: non-finite statistic at index " +
                                  std::to_string(i));
    p[i] = two_sided_pvalue(u[i], null_spec);
  }
  return p;
}

namespace {

// Shared tail walk: sorts indices by |u| descending and hands each tie group
// (all indices with the same |u|, which share one tail set) to the visitor
// together with the running tail size.
template <typename Visit>
void walk_tail_groups(const StatVector& u, Visit visit) {
  const std::size_t n = u.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(u[a]) > std::fabs(u[b]);
  });
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && std::fabs(u[order[end]]) == std::fabs(u[order[start]])) ++end;
    visit(order, start, end);
    start = end;
  }
}

}  // namespace

FdrVector fdr_to_Fdr(const StatVector& u, const FdrVector& fdr) {
  require_same_length(u.size(), fdr.size(), "fdr_to_Fdr");
  FdrVector out(u.size());
  double tail_sum = 0.0;
  walk_tail_groups(u, [&](const std::vector<std::size_t>& order, std::size_t start,
                          std::size_t end) {
    for (std::size_t k = start; k < end; ++k) tail_sum += fdr[order[k]];
    const double value = tail_sum / static_cast<double>(end);
    for (std::size_t k = start; k < end; ++k) out[order[k]] = value;
  });
  return out;
}

FdrVector empirical_Fdr(const StatVector& u, const LabelVector& l) {
  require_same_length(u.size(), l.size(), "empirical_Fdr");
  FdrVector out(u.size());
  std::size_t tail_nulls = 0;
  walk_tail_groups(u, [&](const std::vector<std::size_t>& order, std::size_t start,
                          std::size_t end) {
    for (std::size_t k = start; k < end; ++k) tail_nulls += (l[order[k]] == 0);
    const double value = static_cast<double>(tail_nulls) / static_cast<double>(end);
    for (std::size_t k = start; k < end; ++k) out[order[k]] = value;
  });
  return out;
}

double mse_loss(const FdrVector& fdr_hat, const FdrVector& fdr_true) {
  require_same_length(fdr_hat.size(), fdr_true.size(), "mse_loss");
  if (fdr_hat.empty()) throw std::invalid_argument("mse_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < fdr_hat.size(); ++i) {
    const double d = fdr_hat[i] - fdr_true[i];
    acc += d * d;
  }
  return acc / static_cast<double>(fdr_hat.size());
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 step
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace fdrsafe
