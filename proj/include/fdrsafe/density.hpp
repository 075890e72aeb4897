#pragma once

#include <vector>

#include "fdrsafe/types.hpp"

namespace fdrsafe {

// Type-7 quantile (linear interpolation) of an ascending-sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q);

// Natural cubic spline basis in the truncated-power form: columns are
// [x, N_2(x), ..., N_{K-1}(x)] for K knots, linear beyond the boundary
// knots. An intercept column is added by the regression helpers.
class NaturalSplineBasis {
 public:
  explicit NaturalSplineBasis(std::vector<double> knots);

  // Boundary knots at min/max of x, interior knots at evenly spaced
  // type-7 quantiles; df basis columns (excluding intercept).
  static NaturalSplineBasis from_data(const std::vector<double>& x, int df);

  std::size_t dim() const { return knots_.size() - 1; }
  void eval(double x, double* out) const;
  std::vector<double> eval(double x) const;

 private:
  std::vector<double> knots_;
};

// Poisson log-linear regression by iteratively reweighted least squares.
// X is row-major n x p (with intercept column included by the caller).
// Throws FitError on a singular system or non-convergence.
struct PoissonFit {
  std::vector<double> beta;
  double deviance = 0.0;
  int iterations = 0;
};
PoissonFit poisson_regression(const std::vector<double>& X, std::size_t n, std::size_t p,
                              const std::vector<double>& y, int max_iter = 100,
                              double tol = 1e-10);

// Ordinary least squares; returns beta of length p. Throws FitError if the
// system is rank deficient.
std::vector<double> least_squares(const std::vector<double>& X, std::size_t n,
                                  std::size_t p, const std::vector<double>& y);

// Silverman's rule-of-thumb bandwidth: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
double silverman_bandwidth(const std::vector<double>& x);

// Gaussian kernel density evaluated on an equispaced grid with linear
// binning; eval() interpolates linearly between grid nodes.
class GriddedKde {
 public:
  GriddedKde(const std::vector<double>& x, double bandwidth, int n_grid = 1024,
             double cut = 4.0);
  double eval(double x) const;
  double bandwidth() const { return bw_; }

 private:
  double lo_ = 0.0, step_ = 1.0, bw_ = 1.0;
  std::vector<double> density_;
};

// Grenander decreasing-density estimator on [0, 1]: the left derivative of
// the least concave majorant of the p-value ECDF. Throws FitError when all
// p-values coincide (degenerate ECDF).
class GrenanderDensity {
 public:
  explicit GrenanderDensity(const std::vector<double>& p);
  // Left derivative of the majorant at p (p in (0, 1]).
  double at(double p) const;
  const std::vector<double>& knots() const { return knot_x_; }
  const std::vector<double>& slopes() const { return slope_; }

 private:
  std::vector<double> knot_x_;  // ascending, starts after 0
  std::vector<double> slope_;   // slope_[j] on (knot_x_[j-1], knot_x_[j]]
};

}  // namespace fdrsafe
