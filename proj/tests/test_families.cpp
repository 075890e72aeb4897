#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdrsafe/density.hpp"
#include "fdrsafe/generator.hpp"
#include "fdrsafe/grid.hpp"
#include "fdrsafe/rng.hpp"

using namespace fdrsafe;

namespace {

StatVector standard_normal_sample(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  Rng rng(seed);
  StatVector u(n);
  for (double& v : u) v = rng.normal(0.0, sd);
  return u;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("empirical-null family") {
  SUBCASE("pure null data: pi0 high, fdr high") {
    const StatVector u = standard_normal_sample(10000, 17);
    for (const auto nulltype : {NullFitMethod::Mle, NullFitMethod::CentralMatching}) {
      EmpiricalNullParams params;
      params.nulltype = nulltype;
      const FdrFit fit = fit_empirical_null(u, params);
      CHECK(fit.pi0_hat >= 0.95);
      CHECK(median(fit.fdr_hat) >= 0.9);
    }
  }

  SUBCASE("mixture data: fdr near 1 at the center, lower in the tails") {
    const GeneratorParams phi{0.8, 1.0, 0.5, 2.5, 2.5};
    const SyntheticDataset ds = sample_dataset(phi, 4000, 21);
    const FdrFit fit = fit_empirical_null(ds.u, EmpiricalNullParams{});
    double center_sum = 0.0, tail_sum = 0.0;
    std::size_t center_n = 0, tail_n = 0;
    for (std::size_t i = 0; i < ds.u.size(); ++i) {
      if (std::fabs(ds.u[i]) < 0.5) {
        center_sum += fit.fdr_hat[i];
        ++center_n;
      } else if (std::fabs(ds.u[i]) > 4.0) {
        tail_sum += fit.fdr_hat[i];
        ++tail_n;
      }
    }
    REQUIRE(center_n > 50);
    REQUIRE(tail_n > 50);
    CHECK(center_sum / center_n > 0.85);
    CHECK(tail_sum / tail_n < 0.4);
  }

  SUBCASE("scale equivariance at c = 2 (mle null, quantile interval)") {
    const GeneratorParams phi{0.75, 1.0, 0.4, 2.0, 3.0};
    const SyntheticDataset ds = sample_dataset(phi, 2000, 31);
    StatVector scaled(ds.u);
    for (double& v : scaled) v *= 2.0;
    for (const auto marginal : {MarginalBasisKind::Spline, MarginalBasisKind::Polynomial}) {
      EmpiricalNullParams params;
      params.nulltype = NullFitMethod::Mle;
      params.marginal = marginal;
      params.pct0 = 0.225;
      params.pct = 0.1;
      const FdrFit base = fit_empirical_null(ds.u, params);
      const FdrFit doubled = fit_empirical_null(scaled, params);
      double max_diff = 0.0;
      for (std::size_t i = 0; i < ds.u.size(); ++i)
        max_diff = std::max(max_diff, std::fabs(base.fdr_hat[i] - doubled.fdr_hat[i]));
      CHECK(max_diff <= 1e-8);
      CHECK(base.pi0_hat == doctest::Approx(doubled.pi0_hat).epsilon(1e-10));
    }
  }

  SUBCASE("degenerate inputs raise fit errors") {
    CHECK_THROWS_AS(fit_empirical_null(StatVector(30, 1.0), EmpiricalNullParams{}), FitError);
    CHECK_THROWS_AS(fit_empirical_null(StatVector(200, 1.0), EmpiricalNullParams{}), FitError);
  }
}

TEST_CASE("grenander family") {
  SUBCASE("least concave majorant hand example") {
    const GrenanderDensity gren({0.2, 0.5, 0.9});
    CHECK(gren.at(0.1) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(gren.at(0.2) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(gren.at(0.35) == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
    CHECK(gren.at(0.9) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(gren.at(0.95) == doctest::Approx(0.0));
  }

  SUBCASE("grenander slopes are nonincreasing") {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> p(200);
      for (double& v : p) v = rng.uniform();
      const GrenanderDensity gren(p);
      const auto& slopes = gren.slopes();
      for (std::size_t i = 1; i < slopes.size(); ++i) CHECK(slopes[i] <= slopes[i - 1] + 1e-12);
    }
  }

  SUBCASE("pure null data: flat density, fdr near pi0") {
    const StatVector u = standard_normal_sample(20000, 23);
    for (const auto method : {CutoffMethod::Fndr, CutoffMethod::Pct0}) {
      GrenanderParams params;
      params.cutoff_method = method;
      params.pct0 = 0.75;
      const FdrFit fit = fit_grenander(u, params);
      // Density near 1 across the bulk of the p scale; fdr tracks pi0.
      const auto p = to_pvalues(u, NullSpec::standard_normal());
      const GrenanderDensity gren(p);
      for (const double q : {0.2, 0.4, 0.6, 0.8})
        CHECK(gren.at(q) == doctest::Approx(1.0).epsilon(0.1));
      CHECK(median(fit.fdr_hat) == doctest::Approx(fit.pi0_hat).epsilon(0.1));
    }
  }

  SUBCASE("degenerate inputs raise fit errors") {
    CHECK_THROWS_AS(fit_grenander(StatVector(10, 0.5), GrenanderParams{}), FitError);
    // All equal |u| collapses the p-value ECDF.
    StatVector repeated(100, 1.5);
    CHECK_THROWS_AS(fit_grenander(repeated, GrenanderParams{}), FitError);
    CHECK_THROWS_AS(fit_grenander(StatVector(100, 0.0), GrenanderParams{}), FitError);
  }
}

TEST_CASE("pvalue family") {
  SUBCASE("uniform p-values: pi0 near 1, bulk fdr near pi0") {
    Rng rng(29);
    std::vector<double> p(10000);
    for (double& v : p) v = rng.uniform();
    for (const auto transf : {PTransform::Probit, PTransform::Logit}) {
      PValueParams params;
      params.transf = transf;
      const FdrFit fit = fit_pvalue_family(p, params);
      CHECK(fit.pi0_hat >= 0.9);
      CHECK(median(fit.fdr_hat) == doctest::Approx(fit.pi0_hat).epsilon(0.1));
    }
  }

  SUBCASE("pi0 = 0 makes all fdr zero") {
    // Spread-out tiny p-values: every pi0(lambda) is 0.
    std::vector<double> p(100);
    for (std::size_t i = 0; i < p.size(); ++i)
      p[i] = 1e-6 + 1e-8 * static_cast<double>(i);
    const FdrFit fit = fit_pvalue_family(p, PValueParams{});
    CHECK(fit.pi0_hat == 0.0);
    for (const double v : fit.fdr_hat) CHECK(v == 0.0);
  }

  SUBCASE("fdr is nondecreasing in p, always") {
    Rng rng(41);
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> p(500);
      for (double& v : p) v = std::pow(rng.uniform(), rng.uniform(0.3, 3.0));
      PValueParams params;
      params.pi0_method = rep % 2 == 0 ? Pi0Method::Smoother : Pi0Method::Bootstrap;
      params.transf = rep % 3 == 0 ? PTransform::Logit : PTransform::Probit;
      const FdrFit fit = fit_pvalue_family(p, params);
      std::vector<std::size_t> order(p.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
      for (std::size_t k = 1; k < order.size(); ++k)
        CHECK(fit.fdr_hat[order[k]] >= fit.fdr_hat[order[k - 1]]);
    }
  }

  SUBCASE("identical p-values raise a fit error") {
    CHECK_THROWS_AS(fit_pvalue_family(std::vector<double>(50, 0.4), PValueParams{}), FitError);
  }

  SUBCASE("out-of-range p-values are input errors") {
    CHECK_THROWS_AS(fit_pvalue_family({0.5, 1.2}, PValueParams{}), std::invalid_argument);
  }
}

TEST_CASE("pi0 lambda estimator") {
  SUBCASE("raw curve value doubles, final estimate capped at 1") {
    // Ten p-values all above 0.5: pi0(0.5) = 10 / (10 * 0.5) = 2.
    std::vector<double> p;
    for (int i = 0; i < 10; ++i) p.push_back(0.52 + 0.04 * i);
    const auto curve = pi0_lambda_curve(p, {0.5});
    CHECK(curve[0] == doctest::Approx(2.0));
    CHECK(estimate_pi0_lambda(p, Pi0Method::Smoother, false) == 1.0);
    CHECK(estimate_pi0_lambda(p, Pi0Method::Smoother, true) == 1.0);
    CHECK(estimate_pi0_lambda(p, Pi0Method::Bootstrap, false) == 1.0);
  }

  SUBCASE("all-zero p-values estimate pi0 = 0") {
    const std::vector<double> p(50, 0.0);
    const auto curve = pi0_lambda_curve(p, pi0_lambda_grid());
    for (const double v : curve) CHECK(v == 0.0);
    CHECK(estimate_pi0_lambda(p, Pi0Method::Smoother, false) == 0.0);
    CHECK(estimate_pi0_lambda(p, Pi0Method::Bootstrap, false) == 0.0);
  }

  SUBCASE("uniform p-values estimate pi0 near 1") {
    Rng rng(47);
    std::vector<double> p(20000);
    for (double& v : p) v = rng.uniform();
    for (const auto method : {Pi0Method::Smoother, Pi0Method::Bootstrap}) {
      const double pi0 = estimate_pi0_lambda(p, method, false);
      CHECK(pi0 == doctest::Approx(1.0).epsilon(0.05));
    }
    CHECK(estimate_pi0_lambda(p, Pi0Method::Smoother, true) == doctest::Approx(1.0).epsilon(0.05));
  }

  SUBCASE("deterministic bootstrap") {
    Rng rng(53);
    std::vector<double> p(500);
    for (double& v : p) v = rng.uniform();
    const double a = estimate_pi0_lambda(p, Pi0Method::Bootstrap, false);
    const double b = estimate_pi0_lambda(p, Pi0Method::Bootstrap, false);
    CHECK(a == b);
  }
}
