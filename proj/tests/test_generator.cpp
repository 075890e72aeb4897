#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdrsafe/dist.hpp"
#include "fdrsafe/generator.hpp"
#include "fdrsafe/rng.hpp"

using namespace fdrsafe;

namespace {

// Simpson quadrature of the alternative density over [-span, span].
double integrate_f1(const GeneratorParams& phi, double span, int n_panels) {
  const double h = 2.0 * span / n_panels;
  auto f1 = [&](double u) { return eval_densities(u, phi).f1; };
  double acc = f1(-span) + f1(span);
  for (int k = 1; k < n_panels; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * f1(-span + k * h);
  return acc * h / 3.0;
}

GeneratorParams random_phi(Rng& rng) {
  GeneratorParams phi;
  phi.pi0 = rng.uniform(0.05, 0.95);
  phi.sigma0 = rng.uniform(0.5, 3.0);
  phi.pi1n = rng.uniform(0.05, 0.95);
  phi.sigma1n = rng.uniform(0.5, 4.0);
  phi.sigma1p = rng.uniform(0.5, 4.0);
  return phi;
}

}  // namespace

TEST_CASE("eval_densities") {
  SUBCASE("alternative density vanishes at zero") {
    Rng rng(2);
    for (int rep = 0; rep < 10; ++rep) {
      const GeneratorParams phi = random_phi(rng);
      const Densities d = eval_densities(0.0, phi);
      CHECK(d.f1 == 0.0);
      CHECK(d.f0 > 0.0);
      CHECK(d.f == doctest::Approx(phi.pi0 * d.f0));
    }
  }

  SUBCASE("hand evaluation at u = 1, phi = (0.8, 1, 0.5, 2, 2)") {
    const GeneratorParams phi{0.8, 1.0, 0.5, 2.0, 2.0};
    const Densities d = eval_densities(1.0, phi);
    // f0 = N(1; 0, 1); f1 = (1 - 0.5) * (2 * 1 / 4) * N(1; 0, 2).
    const double f0 = std::exp(-0.5) / std::sqrt(2.0 * M_PI);
    const double f1 = 0.5 * 0.5 * (std::exp(-1.0 / 8.0) / (2.0 * std::sqrt(2.0 * M_PI)));
    CHECK(d.f0 == doctest::Approx(f0).epsilon(1e-12));
    CHECK(d.f1 == doctest::Approx(f1).epsilon(1e-12));
    CHECK(d.f == doctest::Approx(0.8 * f0 + 0.2 * f1).epsilon(1e-12));
  }

  SUBCASE("alternative integrates to one") {
    Rng rng(3);
    for (int rep = 0; rep < 5; ++rep) {
      const GeneratorParams phi = random_phi(rng);
      const double span = 50.0 * std::max({phi.sigma0, phi.sigma1n, phi.sigma1p});
      CHECK(integrate_f1(phi, span, 40000) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }

  SUBCASE("mirror symmetry under sign flip with swapped branches") {
    Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
      const GeneratorParams phi = random_phi(rng);
      GeneratorParams mirrored = phi;
      std::swap(mirrored.sigma1n, mirrored.sigma1p);
      mirrored.pi1n = 1.0 - phi.pi1n;
      const double u = rng.uniform(-8.0, 8.0);
      CHECK(eval_densities(u, phi).f1 ==
            doctest::Approx(eval_densities(-u, mirrored).f1).epsilon(1e-12));
    }
  }

  SUBCASE("f dominates pi0 * f0") {
    Rng rng(5);
    const GeneratorParams phi = random_phi(rng);
    for (int k = 0; k < 100; ++k) {
      const double u = rng.uniform(-10.0, 10.0);
      const Densities d = eval_densities(u, phi);
      CHECK(d.f >= phi.pi0 * d.f0);
      CHECK(d.f0 >= 0.0);
      CHECK(d.f1 >= 0.0);
    }
  }

  SUBCASE("invalid parameters throw") {
    GeneratorParams bad;
    bad.sigma0 = 0.0;
    CHECK_THROWS_AS(eval_densities(1.0, bad), std::invalid_argument);
    bad = GeneratorParams{};
    bad.pi0 = 1.5;
    CHECK_THROWS_AS(eval_densities(1.0, bad), std::invalid_argument);
  }
}

TEST_CASE("sample_dataset") {
  SUBCASE("pi0 = 1 gives all null labels") {
    GeneratorParams phi;
    phi.pi0 = 1.0;
    const SyntheticDataset ds = sample_dataset(phi, 500, 9);
    CHECK(std::accumulate(ds.l.begin(), ds.l.end(), 0) == 0);
  }

  SUBCASE("pi0 = 0, pi1n = 1 forces negative statistics") {
    GeneratorParams phi;
    phi.pi0 = 0.0;
    phi.pi1n = 1.0;
    const SyntheticDataset ds = sample_dataset(phi, 500, 10);
    CHECK(std::accumulate(ds.l.begin(), ds.l.end(), 0) == 500);
    CHECK(std::all_of(ds.u.begin(), ds.u.end(), [](double v) { return v < 0.0; }));
  }

  SUBCASE("label fraction follows 1 - pi0") {
    GeneratorParams phi;
    phi.pi0 = 0.8;
    const SyntheticDataset ds = sample_dataset(phi, 100000, 11);
    const double frac =
        std::accumulate(ds.l.begin(), ds.l.end(), 0.0) / static_cast<double>(ds.l.size());
    CHECK(frac == doctest::Approx(0.2).epsilon(0.05));  // 0.2 +/- 0.01 absolute
    CHECK(std::fabs(frac - 0.2) <= 0.01);
  }

  SUBCASE("equal seeds are bit-identical, different seeds differ") {
    const GeneratorParams phi;
    const SyntheticDataset a = sample_dataset(phi, 200, 42);
    const SyntheticDataset b = sample_dataset(phi, 200, 42);
    const SyntheticDataset c = sample_dataset(phi, 200, 43);
    CHECK(a.u == b.u);
    CHECK(a.l == b.l);
    CHECK(a.fdr_true == b.fdr_true);
    CHECK(a.u != c.u);
  }

  SUBCASE("fdr_true is consistent with true_fdr") {
    const GeneratorParams phi{0.7, 1.0, 0.4, 2.0, 3.0};
    const SyntheticDataset ds = sample_dataset(phi, 300, 12);
    const FdrVector expect = true_fdr(ds.u, phi);
    CHECK(ds.fdr_true == expect);
  }
}

TEST_CASE("true_fdr") {
  SUBCASE("equals 1 at u = 0") {
    Rng rng(6);
    for (int rep = 0; rep < 10; ++rep) {
      GeneratorParams phi = random_phi(rng);
      phi.pi0 = std::max(phi.pi0, 0.01);
      CHECK(true_fdr_at(0.0, phi) == 1.0);
    }
  }

  SUBCASE("pi0 = 1 forces fdr = 1 everywhere") {
    GeneratorParams phi;
    phi.pi0 = 1.0;
    const FdrVector fdr = true_fdr({-3.0, -0.5, 0.0, 2.0, 8.0}, phi);
    for (const double v : fdr) CHECK(v == 1.0);
  }

  SUBCASE("binned Monte Carlo posterior matches") {
    const GeneratorParams phi{0.8, 1.0, 0.3, 2.0, 3.0};
    const SyntheticDataset ds = sample_dataset(phi, 200000, 77);
    // Bin statistics; compare the fraction of nulls per bin against the
    // mean of the Bayes-rule fdr in that bin.
    const double lo = -8.0, hi = 8.0;
    const int n_bins = 40;
    std::vector<double> fdr_sum(n_bins, 0.0);
    std::vector<std::size_t> nulls(n_bins, 0), count(n_bins, 0);
    for (std::size_t i = 0; i < ds.u.size(); ++i) {
      if (ds.u[i] < lo || ds.u[i] >= hi) continue;
      const auto bin = static_cast<std::size_t>((ds.u[i] - lo) / (hi - lo) * n_bins);
      fdr_sum[bin] += ds.fdr_true[i];
      nulls[bin] += (ds.l[i] == 0);
      count[bin] += 1;
    }
    std::size_t checked = 0;
    for (int b = 0; b < n_bins; ++b) {
      if (count[b] < 500) continue;
      const double observed = static_cast<double>(nulls[b]) / static_cast<double>(count[b]);
      const double predicted = fdr_sum[b] / static_cast<double>(count[b]);
      CHECK(std::fabs(observed - predicted) <= 0.03);
      ++checked;
    }
    CHECK(checked >= 10);
  }
}

TEST_CASE("fit_em") {
  SUBCASE("log-likelihood is monotone nondecreasing") {
    Rng rng(13);
    for (int rep = 0; rep < 3; ++rep) {
      const GeneratorParams phi = random_phi(rng);
      const SyntheticDataset ds = sample_dataset(phi, 2000, 100 + rep);
      const EmFit fit = fit_em(ds.u, {}, 5);
      for (const auto& trace : fit.ll_traces) {
        REQUIRE(!trace.empty());
        for (std::size_t t = 1; t < trace.size(); ++t)
          CHECK(trace[t] >= trace[t - 1] - 1e-8 * (1.0 + std::fabs(trace[t - 1])));
      }
    }
  }

  SUBCASE("parameter recovery on well-specified data") {
    const GeneratorParams truth{0.8, 1.0, 0.3, 2.0, 3.0};
    for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
      const SyntheticDataset ds = sample_dataset(truth, 20000, seed);
      const EmFit fit = fit_em(ds.u, {}, seed);
      CHECK(std::fabs(fit.params.pi0 - truth.pi0) <= 0.03);
      CHECK(std::fabs(fit.params.pi1n - truth.pi1n) <= 0.05);
      CHECK(std::fabs(fit.params.sigma0 / truth.sigma0 - 1.0) <= 0.08);
      CHECK(std::fabs(fit.params.sigma1n / truth.sigma1n - 1.0) <= 0.08);
      CHECK(std::fabs(fit.params.sigma1p / truth.sigma1p - 1.0) <= 0.08);
    }
  }

  SUBCASE("pure null data pushes pi0 to the boundary region") {
    Rng rng(14);
    StatVector u(20000);
    for (double& v : u) v = rng.normal(0.0, 2.0);
    const EmFit fit = fit_em(u, {}, 1);
    CHECK(fit.params.pi0 >= 0.9);
    CHECK(fit.params.sigma0 == doctest::Approx(2.0).epsilon(0.05));
  }

  SUBCASE("permutation invariance up to numerical noise") {
    const GeneratorParams truth{0.75, 1.0, 0.5, 2.5, 2.5};
    SyntheticDataset ds = sample_dataset(truth, 3000, 55);
    const EmFit base = fit_em(ds.u, {}, 7);
    StatVector reversed(ds.u.rbegin(), ds.u.rend());
    const EmFit flipped = fit_em(reversed, {}, 7);
    CHECK(flipped.params.pi0 == doctest::Approx(base.params.pi0).epsilon(1e-6));
    CHECK(flipped.params.sigma0 == doctest::Approx(base.params.sigma0).epsilon(1e-6));
    CHECK(flipped.params.sigma1p == doctest::Approx(base.params.sigma1p).epsilon(1e-6));
  }

  SUBCASE("degenerate inputs raise fit errors") {
    CHECK_THROWS_AS(fit_em({1.0, 2.0}, {}, 1), FitError);                 // too few
    CHECK_THROWS_AS(fit_em(StatVector(100, 0.0), {}, 1), FitError);       // all zero
    StatVector bad(100, 1.0);
    bad[3] = std::nan("");
    CHECK_THROWS_AS(fit_em(bad, {}, 1), FitError);
  }

  SUBCASE("statistics at zero keep null responsibility") {
    // A few exact zeros must not break the fit; they carry f1 = 0.
    Rng rng(15);
    StatVector u(1000);
    for (double& v : u) v = rng.normal();
    for (int k = 0; k < 10; ++k) u[k * 7] = 0.0;
    const EmFit fit = fit_em(u, {}, 2);
    CHECK(std::isfinite(fit.log_lik));
    CHECK(fit.params.pi0 > 0.5);
  }
}
