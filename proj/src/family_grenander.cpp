#include <algorithm>
#include <cmath>

#include "fdrsafe/density.hpp"
#include "fdrsafe/dist.hpp"
#include "fdrsafe/grid.hpp"

namespace fdrsafe {

namespace {

// Half-Normal MLE of the null scale from the statistics with |u| <= cutoff.
double central_scale(const StatVector& u, double cutoff) {
  double s2 = 0.0;
  std::size_t n = 0;
  for (const double x : u) {
    if (std::fabs(x) > cutoff) continue;
    s2 += x * x;
    ++n;
  }
  if (n == 0) throw FitError("grenander family: empty central subset");
  return std::sqrt(s2 / static_cast<double>(n));
}

}  // namespace

FdrFit fit_grenander(const StatVector& u, const GrenanderParams& params) {
  if (!(params.pct0 > 0.0 && params.pct0 <= 1.0))
    throw std::invalid_argument("grenander family: pct0 must be in (0, 1]");
  const std::size_t I = u.size();
  if (I < 50) throw FitError("grenander family: insufficient data (need >= 50)");

  std::vector<double> abs_sorted(I);
  for (std::size_t i = 0; i < I; ++i) abs_sorted[i] = std::fabs(u[i]);
  std::sort(abs_sorted.begin(), abs_sorted.end());

  double sigma;
  if (params.cutoff_method == CutoffMethod::Pct0) {
    sigma = central_scale(u, quantile_sorted(abs_sorted, params.pct0));
  } else {
    // fndr: start from the central 75%, re-derive the cutoff from the
    // current null-fraction estimate, three rounds.
    double cutoff = quantile_sorted(abs_sorted, 0.75);
    sigma = 0.0;
    for (int round = 0; round < 3; ++round) {
      sigma = central_scale(u, cutoff);
      if (!(sigma > 0.0)) throw FitError("grenander family: zero sigma estimate");
      std::size_t n_large = 0;  // #{p > 0.5} = #{|u| < sigma * z_{0.75}}
      const double half_cut = sigma * 0.6744897501960817;
      for (const double a : abs_sorted)
        if (a < half_cut) ++n_large;
      const double pi0 = std::min(1.0, static_cast<double>(n_large) / (0.5 * static_cast<double>(I)));
      cutoff = quantile_sorted(abs_sorted, pi0);
    }
  }
  if (!(sigma > 0.0)) throw FitError("grenander family: zero sigma estimate");

  std::vector<double> p(I);
  for (std::size_t i = 0; i < I; ++i)
    p[i] = std::clamp(2.0 * norm_sf(std::fabs(u[i]) / sigma), 1e-300, 1.0);

  const GrenanderDensity gren(p);
  const double p_max = *std::max_element(p.begin(), p.end());
  const double pi0 = std::min(1.0, gren.at(p_max));

  FdrFit fit;
  fit.pi0_hat = pi0;
  fit.fdr_hat.resize(I);
  for (std::size_t i = 0; i < I; ++i) {
    const double fhat = gren.at(p[i]);
    fit.fdr_hat[i] = fhat > 0.0 ? std::min(1.0, pi0 / fhat) : 1.0;
  }
  return fit;
}

}  // namespace fdrsafe
