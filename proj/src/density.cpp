#include "fdrsafe/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "fdrsafe/dist.hpp"

namespace fdrsafe {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty input");
  q = std::clamp(q, 0.0, 1.0);
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

NaturalSplineBasis::NaturalSplineBasis(std::vector<double> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw FitError("spline basis: need at least 2 knots");
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (!(knots_[i] > knots_[i - 1])) throw FitError("spline basis: knots not strictly increasing");
}

NaturalSplineBasis NaturalSplineBasis::from_data(const std::vector<double>& x, int df) {
  if (df < 1) throw FitError("spline basis: df must be >= 1");
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  const int n_knots = df + 1;  // boundary pair + (df - 1) interior
  std::vector<double> knots;
  knots.reserve(n_knots);
  for (int k = 0; k < n_knots; ++k)
    knots.push_back(quantile_sorted(sorted, static_cast<double>(k) / (n_knots - 1)));
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  return NaturalSplineBasis(std::move(knots));
}

void NaturalSplineBasis::eval(double x, double* out) const {
  const std::size_t K = knots_.size();
  const double xi_last = knots_[K - 1];
  const double xi_penult = knots_[K - 2];
  auto cube_pos = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  auto d = [&](double xi) {
    return (cube_pos(x - xi) - cube_pos(x - xi_last)) / (xi_last - xi);
  };
  out[0] = x;
  const double d_penult = d(xi_penult);
  for (std::size_t k = 0; k + 2 < K; ++k) out[k + 1] = d(knots_[k]) - d_penult;
}

std::vector<double> NaturalSplineBasis::eval(double x) const {
  std::vector<double> out(dim());
  eval(x, out.data());
  return out;
}

namespace {

Eigen::MatrixXd to_matrix(const std::vector<double>& X, std::size_t n, std::size_t p) {
  Eigen::MatrixXd M(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) M(i, j) = X[i * p + j];
  return M;
}

}  // namespace

PoissonFit poisson_regression(const std::vector<double>& X, std::size_t n, std::size_t p,
                              const std::vector<double>& y, int max_iter, double tol) {
  if (n < p) throw FitError("poisson regression: more parameters than observations");
  const Eigen::MatrixXd M = to_matrix(X, n, p);
  Eigen::VectorXd yv(n);
  for (std::size_t i = 0; i < n; ++i) yv(i) = y[i];

  Eigen::VectorXd eta(n);
  for (std::size_t i = 0; i < n; ++i) eta(i) = std::log(yv(i) + 0.5);

  PoissonFit fit;
  double prev_dev = std::numeric_limits<double>::infinity();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::ArrayXd mu = eta.array().exp();
    // Weighted LS on working response z = eta + (y - mu)/mu with W = mu.
    const Eigen::ArrayXd w = mu.max(1e-10);
    const Eigen::VectorXd z = eta.array() + (yv.array() - mu) / w;
    const Eigen::VectorXd sw = w.sqrt();
    const Eigen::MatrixXd Xw = sw.asDiagonal() * M;
    const Eigen::VectorXd zw = sw.asDiagonal() * z;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
    if (qr.rank() < static_cast<Eigen::Index>(p))
      throw FitError("poisson regression: singular design matrix");
    beta = qr.solve(zw);
    eta = M * beta;
    if (!eta.allFinite()) throw FitError("poisson regression: diverged");

    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mui = std::exp(eta(i));
      dev += 2.0 * ((yv(i) > 0.0 ? yv(i) * std::log(yv(i) / mui) : 0.0) - (yv(i) - mui));
    }
    fit.iterations = iter + 1;
    fit.deviance = dev;
    if (std::fabs(dev - prev_dev) <= tol * (std::fabs(dev) + 0.1)) break;
    prev_dev = dev;
  }
  fit.beta.assign(beta.data(), beta.data() + p);
  return fit;
}

std::vector<double> least_squares(const std::vector<double>& X, std::size_t n,
                                  std::size_t p, const std::vector<double>& y) {
  if (n < p) throw FitError("least squares: more parameters than observations");
  const Eigen::MatrixXd M = to_matrix(X, n, p);
  Eigen::VectorXd yv(n);
  for (std::size_t i = 0; i < n; ++i) yv(i) = y[i];
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  if (qr.rank() < static_cast<Eigen::Index>(p))
    throw FitError("least squares: rank-deficient design matrix");
  const Eigen::VectorXd beta = qr.solve(yv);
  return {beta.data(), beta.data() + p};
}

double silverman_bandwidth(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (const double v : x) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

GriddedKde::GriddedKde(const std::vector<double>& x, double bandwidth, int n_grid, double cut) {
  if (x.empty()) throw FitError("kde: empty sample");
  if (!(bandwidth > 0.0)) throw FitError("kde: nonpositive bandwidth");
  bw_ = bandwidth;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  lo_ = *mn - cut * bw_;
  const double hi = *mx + cut * bw_;
  step_ = (hi - lo_) / (n_grid - 1);
  // Linear binning of sample mass onto the grid.
  std::vector<double> mass(n_grid, 0.0);
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (const double v : x) {
    const double pos = (v - lo_) / step_;
    auto j = static_cast<std::size_t>(pos);
    if (j >= static_cast<std::size_t>(n_grid - 1)) j = n_grid - 2;
    const double frac = pos - static_cast<double>(j);
    mass[j] += (1.0 - frac) * inv_n;
    mass[j + 1] += frac * inv_n;
  }
  // Convolve with the Gaussian kernel, truncated at 6 bandwidths.
  const int radius = std::min(n_grid - 1, static_cast<int>(std::ceil(6.0 * bw_ / step_)));
  std::vector<double> kernel(radius + 1);
  for (int k = 0; k <= radius; ++k) kernel[k] = norm_pdf(k * step_, bw_);
  density_.assign(n_grid, 0.0);
  for (int j = 0; j < n_grid; ++j) {
    if (mass[j] == 0.0) continue;
    const double m = mass[j];
    density_[j] += m * kernel[0];
    for (int k = 1; k <= radius; ++k) {
      const double mk = m * kernel[k];
      if (j - k >= 0) density_[j - k] += mk;
      if (j + k < n_grid) density_[j + k] += mk;
    }
  }
}

double GriddedKde::eval(double x) const {
  const double pos = (x - lo_) / step_;
  if (pos <= 0.0) return density_.front();
  if (pos >= static_cast<double>(density_.size() - 1)) return density_.back();
  const auto j = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(j);
  return density_[j] * (1.0 - frac) + density_[j + 1] * frac;
}

GrenanderDensity::GrenanderDensity(const std::vector<double>& p) {
  if (p.empty()) throw FitError("grenander: empty input");
  std::vector<double> sorted(p);
  std::sort(sorted.begin(), sorted.end());
  if (!(sorted.front() >= 0.0 && sorted.back() <= 1.0))
    throw FitError("grenander: p-values outside [0, 1]");
  if (sorted.front() == sorted.back()) throw FitError("grenander: degenerate ECDF (all p equal)");

  // ECDF knots (unique p, cumulative fraction), with (0,0) prepended and
  // (1,1) appended when the largest p falls short of 1.
  const double n = static_cast<double>(sorted.size());
  std::vector<double> px{0.0}, py{0.0};
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    px.push_back(sorted[i]);
    py.push_back(static_cast<double>(j) / n);
    i = j;
  }
  if (px.back() < 1.0) {
    px.push_back(1.0);
    py.push_back(1.0);
  }

  // Least concave majorant: upper hull of the ECDF points (monotone chain).
  std::vector<std::size_t> hull;
  for (std::size_t k = 0; k < px.size(); ++k) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      const double cross = (px[b] - px[a]) * (py[k] - py[a]) - (py[b] - py[a]) * (px[k] - px[a]);
      if (cross >= 0.0)
        hull.pop_back();  // b lies on or below chord a->k: not on the majorant
      else
        break;
    }
    hull.push_back(k);
  }

  knot_x_.reserve(hull.size() - 1);
  slope_.reserve(hull.size() - 1);
  for (std::size_t k = 1; k < hull.size(); ++k) {
    const std::size_t a = hull[k - 1], b = hull[k];
    knot_x_.push_back(px[b]);
    slope_.push_back((py[b] - py[a]) / (px[b] - px[a]));
  }
}

double GrenanderDensity::at(double p) const {
  // Left derivative: slope of the segment whose right knot is the first >= p.
  const auto it = std::lower_bound(knot_x_.begin(), knot_x_.end(), p);
  if (it == knot_x_.end()) return slope_.back();
  return slope_[static_cast<std::size_t>(it - knot_x_.begin())];
}

}  // namespace fdrsafe
