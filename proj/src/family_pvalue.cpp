#include <algorithm>
#include <cmath>

#include "fdrsafe/density.hpp"
#include "fdrsafe/dist.hpp"
#include "fdrsafe/grid.hpp"
#include "fdrsafe/rng.hpp"

namespace fdrsafe {

namespace {

// Clamp used only for the probit/logit transform; keeps both transforms
// finite at p = 0 and p = 1.
constexpr double kTransformEps = 1e-8;
constexpr int kBootstrapReps = 100;

void check_pvalues(const std::vector<double>& p) {
  if (p.empty()) throw std::invalid_argument("pvalue family: empty p-value vector");
  for (const double v : p)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("pvalue family: p-values must lie in [0, 1]");
}

std::vector<double> curve_from_sorted(const std::vector<double>& sorted_p,
                                      const std::vector<double>& lambdas) {
  const double n = static_cast<double>(sorted_p.size());
  std::vector<double> curve(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const auto above = sorted_p.end() -
                       std::upper_bound(sorted_p.begin(), sorted_p.end(), lambdas[j]);
    curve[j] = static_cast<double>(above) / (n * (1.0 - lambdas[j]));
  }
  return curve;
}

}  // namespace

std::vector<double> pi0_lambda_grid() {
  std::vector<double> lambdas(19);
  for (int i = 0; i < 19; ++i) lambdas[i] = 0.05 * (i + 1);
  return lambdas;
}

std::vector<double> pi0_lambda_curve(const std::vector<double>& p,
                                     const std::vector<double>& lambdas) {
  check_pvalues(p);
  std::vector<double> sorted(p);
  std::sort(sorted.begin(), sorted.end());
  return curve_from_sorted(sorted, lambdas);
}

double estimate_pi0_lambda(const std::vector<double>& p, Pi0Method method,
                           bool smooth_log_pi0) {
  check_pvalues(p);
  const std::vector<double> lambdas = pi0_lambda_grid();
  std::vector<double> sorted(p);
  std::sort(sorted.begin(), sorted.end());
  const std::vector<double> curve = curve_from_sorted(sorted, lambdas);

  double pi0;
  if (method == Pi0Method::Smoother) {
    // Natural-spline (3 df) regression of the curve against lambda,
    // evaluated at the largest lambda.
    std::vector<double> y(curve.size());
    for (std::size_t j = 0; j < curve.size(); ++j)
      y[j] = smooth_log_pi0 ? std::log(std::max(curve[j], 1e-10)) : curve[j];
    const NaturalSplineBasis basis = NaturalSplineBasis::from_data(lambdas, 3);
    const std::size_t dim = basis.dim(), cols = dim + 1;
    std::vector<double> X(lambdas.size() * cols), row(dim);
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      basis.eval(lambdas[j], row.data());
      X[j * cols] = 1.0;
      std::copy(row.begin(), row.end(), X.begin() + j * cols + 1);
    }
    const std::vector<double> beta = least_squares(X, lambdas.size(), cols, y);
    basis.eval(lambdas.back(), row.data());
    double pred = beta[0];
    for (std::size_t j = 0; j < dim; ++j) pred += beta[j + 1] * row[j];
    pi0 = smooth_log_pi0 ? std::exp(pred) : pred;
  } else {
    // Bootstrap: pick the lambda whose pi0(lambda) has the smallest
    // estimated MSE around the plug-in minimum of the observed curve.
    const double reference = *std::min_element(curve.begin(), curve.end());
    std::vector<double> mse(lambdas.size(), 0.0);
    Rng rng(0xB0075EEDull);
    std::vector<double> resampled(p.size());
    for (int b = 0; b < kBootstrapReps; ++b) {
      for (double& v : resampled) v = p[rng.integer(p.size())];
      std::sort(resampled.begin(), resampled.end());
      const std::vector<double> boot = curve_from_sorted(resampled, lambdas);
      for (std::size_t j = 0; j < lambdas.size(); ++j) {
        const double d = boot[j] - reference;
        mse[j] += d * d;
      }
    }
    const std::size_t best =
        static_cast<std::size_t>(std::min_element(mse.begin(), mse.end()) - mse.begin());
    pi0 = curve[best];
  }
  return std::clamp(pi0, 0.0, 1.0);
}

FdrFit fit_pvalue_family(const std::vector<double>& p, const PValueParams& params) {
  if (!(params.adj > 0.0))
    throw std::invalid_argument("pvalue family: adj must be positive");
  check_pvalues(p);
  const std::size_t I = p.size();
  if (I < 2) throw FitError("pvalue family: insufficient data (need at least 2 p-values)");

  const double pi0 = estimate_pi0_lambda(p, params.pi0_method, params.smooth_log_pi0);

  std::vector<double> pc(I), x(I);
  for (std::size_t i = 0; i < I; ++i) {
    pc[i] = std::clamp(p[i], kTransformEps, 1.0 - kTransformEps);
    x[i] = params.transf == PTransform::Probit ? norm_quantile(pc[i])
                                               : std::log(pc[i] / (1.0 - pc[i]));
  }
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  if (*xmin == *xmax) throw FitError("pvalue family: all p-values identical");

  const double bw = params.adj * silverman_bandwidth(x);
  if (!(bw > 0.0)) throw FitError("pvalue family: degenerate bandwidth");
  const GriddedKde kde(x, bw);

  FdrFit fit;
  fit.pi0_hat = pi0;
  fit.fdr_hat.resize(I);
  for (std::size_t i = 0; i < I; ++i) {
    // Marginal back on the p scale: density of x divided by |dp/dx|.
    const double jac = params.transf == PTransform::Probit ? norm_pdf(x[i])
                                                           : pc[i] * (1.0 - pc[i]);
    const double fhat = kde.eval(x[i]) / jac;
    if (pi0 <= 0.0)
      fit.fdr_hat[i] = 0.0;
    else
      fit.fdr_hat[i] = fhat > 0.0 ? std::min(1.0, pi0 / fhat) : 1.0;
  }

  // Monotone regularization: fdr nondecreasing in p.
  std::vector<std::size_t> order(I);
  for (std::size_t i = 0; i < I; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  double running = 0.0;
  for (const std::size_t idx : order) {
    running = std::max(running, fit.fdr_hat[idx]);
    fit.fdr_hat[idx] = running;
  }
  return fit;
}

}  // namespace fdrsafe
