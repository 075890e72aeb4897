#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "fdrsafe/density.hpp"
#include "fdrsafe/dist.hpp"
#include "fdrsafe/grid.hpp"

namespace fdrsafe {

namespace {

constexpr int kBins = 120;
constexpr int kMarginalDf = 7;

// P(a <= X <= b) for X ~ Normal(0, sigma), stable in both tails.
double normal_interval_prob(double a, double b, double sigma) {
  const double za = a / sigma, zb = b / sigma;
  if (za >= 0.0) return norm_sf(za) - norm_sf(zb);
  return norm_cdf(zb) - norm_cdf(za);
}

// Golden-section maximizer on [lo, hi]; assumes unimodality.
template <typename F>
double golden_max(double lo, double hi, F f, int iters = 120) {
  constexpr double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

struct Binned {
  double lo = 0.0, delta = 1.0;
  std::vector<double> counts;
  std::vector<double> mids;
};

Binned bin_statistics(const StatVector& u, double lo, double hi) {
  Binned b;
  b.lo = lo;
  b.delta = (hi - lo) / kBins;
  b.counts.assign(kBins, 0.0);
  b.mids.resize(kBins);
  for (const double x : u) {
    if (x < lo || x > hi) continue;
    auto bin = static_cast<std::size_t>((x - lo) / b.delta);
    if (bin >= kBins) bin = kBins - 1;
    b.counts[bin] += 1.0;
  }
  for (int k = 0; k < kBins; ++k) b.mids[k] = lo + (k + 0.5) * b.delta;
  return b;
}

// Marginal density by Poisson regression of bin counts on a basis of bin
// midpoints (Lindsey's method); evaluates anywhere via the fitted
// log-linear predictor.
class BinnedMarginal {
 public:
  BinnedMarginal(const Binned& bins, double n_total, MarginalBasisKind kind)
      : delta_(bins.delta), n_total_(n_total), kind_(kind) {
    if (kind_ == MarginalBasisKind::Spline) {
      spline_ = std::make_unique<NaturalSplineBasis>(
          NaturalSplineBasis::from_data(bins.mids, kMarginalDf));
      dim_ = spline_->dim();
    } else {
      double mean = 0.0;
      for (double m : bins.mids) mean += m;
      mean /= kBins;
      double ss = 0.0;
      for (double m : bins.mids) ss += (m - mean) * (m - mean);
      center_ = mean;
      scale_ = std::sqrt(ss / (kBins - 1));
      dim_ = kMarginalDf;
    }

    const std::size_t p = dim_ + 1;
    std::vector<double> X(kBins * p);
    std::vector<double> row(dim_);
    for (int k = 0; k < kBins; ++k) {
      basis_row(bins.mids[k], row.data());
      X[k * p] = 1.0;
      std::copy(row.begin(), row.end(), X.begin() + k * p + 1);
    }
    beta_ = poisson_regression(X, kBins, p, bins.counts).beta;
  }

  double density(double x) const {
    std::vector<double> row(dim_);
    basis_row(x, row.data());
    double eta = beta_[0];
    for (std::size_t j = 0; j < dim_; ++j) eta += beta_[j + 1] * row[j];
    return std::exp(eta) / (n_total_ * delta_);
  }

 private:
  void basis_row(double x, double* out) const {
    if (kind_ == MarginalBasisKind::Spline) {
      spline_->eval(x, out);
    } else {
      const double z = (x - center_) / scale_;
      double pw = 1.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        pw *= z;
        out[j] = pw;
      }
    }
  }

  double delta_, n_total_;
  MarginalBasisKind kind_;
  std::unique_ptr<NaturalSplineBasis> spline_;
  double center_ = 0.0, scale_ = 1.0;
  std::size_t dim_ = 0;
  std::vector<double> beta_;
};

struct WeightedNull {
  double sigma = 1.0;
  double mass = 1.0;  // weighted null density = mass * N(u; 0, sigma)
};

WeightedNull fit_null_mle(const std::vector<double>& central, double a, double b,
                          double n_total) {
  const auto n0 = static_cast<double>(central.size());
  double s2 = 0.0;
  for (const double x : central) s2 += x * x;
  if (!(s2 > 0.0)) throw FitError("empirical null: nonpositive fitted sigma");
  const double sigma_raw = std::sqrt(s2 / n0);

  // Truncated-Normal log-likelihood over the central interval; sigma is the
  // only free shape parameter, the null stays centered at zero.
  auto ll = [&](double log_sigma) {
    const double sigma = std::exp(log_sigma);
    const double prob = normal_interval_prob(a, b, sigma);
    if (!(prob > 0.0)) return -std::numeric_limits<double>::infinity();
    return -n0 * std::log(prob) - n0 * log_sigma - s2 / (2.0 * sigma * sigma);
  };
  const double log_sigma = golden_max(std::log(sigma_raw / 50.0), std::log(sigma_raw * 50.0), ll);

  WeightedNull null;
  null.sigma = std::exp(log_sigma);
  const double prob = normal_interval_prob(a, b, null.sigma);
  if (!(prob > 0.0) || !std::isfinite(null.sigma))
    throw FitError("empirical null: truncated likelihood degenerate");
  null.mass = (n0 / n_total) / prob;
  return null;
}

// Quadratic fit (in u^2, center fixed at zero) to log density of the
// nonempty central bins; sigma and mass read off the coefficients.
WeightedNull fit_null_central_matching(const Binned& bins, double a, double b, double n_total) {
  std::vector<double> X, y;
  for (int k = 0; k < kBins; ++k) {
    if (bins.mids[k] < a || bins.mids[k] > b || bins.counts[k] <= 0.0) continue;
    X.push_back(1.0);
    X.push_back(bins.mids[k] * bins.mids[k]);
    y.push_back(std::log(bins.counts[k] / (n_total * bins.delta)));
  }
  if (y.size() < 3) throw FitError("empirical null: too few central bins for matching");
  const std::vector<double> beta = least_squares(X, y.size(), 2, y);
  if (!(beta[1] < 0.0)) throw FitError("empirical null: nonpositive fitted sigma");
  WeightedNull null;
  null.sigma = std::sqrt(-1.0 / (2.0 * beta[1]));
  null.mass = std::exp(beta[0]) * null.sigma * kSqrt2Pi;
  if (!std::isfinite(null.sigma) || !std::isfinite(null.mass))
    throw FitError("empirical null: degenerate central matching fit");
  return null;
}

}  // namespace

FdrFit fit_empirical_null(const StatVector& u, const EmpiricalNullParams& params) {
  if (!(params.pct0 >= 0.0 && params.pct0 < 0.5))
    throw std::invalid_argument("empirical null: pct0 must be in [0, 0.5)");
  if (!(params.pct >= 0.0 && params.pct < 1.0))
    throw std::invalid_argument("empirical null: pct must be in [0, 1)");
  const std::size_t I = u.size();
  if (I < 50) throw FitError("empirical null: insufficient data (need >= 50)");

  std::vector<double> sorted(u);
  std::sort(sorted.begin(), sorted.end());
  const double lo = quantile_sorted(sorted, params.pct / 2.0);
  const double hi = quantile_sorted(sorted, 1.0 - params.pct / 2.0);
  if (!(hi > lo)) throw FitError("empirical null: degenerate binning range");

  const Binned bins = bin_statistics(u, lo, hi);
  const BinnedMarginal marginal(bins, static_cast<double>(I), params.marginal);

  const double a = quantile_sorted(sorted, params.pct0);
  const double b = quantile_sorted(sorted, 1.0 - params.pct0);
  std::vector<double> central;
  for (const double x : u)
    if (x >= a && x <= b) central.push_back(x);
  if (!(b > a) || central.size() < 2) throw FitError("empirical null: empty central interval");

  const WeightedNull null = params.nulltype == NullFitMethod::Mle
                                ? fit_null_mle(central, a, b, static_cast<double>(I))
                                : fit_null_central_matching(bins, a, b, static_cast<double>(I));

  FdrFit fit;
  fit.pi0_hat = std::min(1.0, null.mass);
  fit.fdr_hat.resize(I);
  for (std::size_t i = 0; i < I; ++i) {
    const double fhat = marginal.density(u[i]);
    const double weighted_null = null.mass * norm_pdf(u[i], null.sigma);
    fit.fdr_hat[i] = fhat > 0.0 ? std::min(1.0, weighted_null / fhat) : 1.0;
  }
  return fit;
}

}  // namespace fdrsafe
