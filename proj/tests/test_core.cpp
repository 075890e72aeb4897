#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdrsafe/core.hpp"
#include "fdrsafe/rng.hpp"

using namespace fdrsafe;

namespace {

// O(I^2) tail-mean oracle for fdr_to_Fdr.
FdrVector brute_force_Fdr(const StatVector& u, const FdrVector& fdr) {
  FdrVector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (std::fabs(u[j]) >= std::fabs(u[i])) {
        sum += fdr[j];
        ++count;
      }
    }
    out[i] = sum / static_cast<double>(count);
  }
  return out;
}

FdrVector brute_force_empirical_Fdr(const StatVector& u, const LabelVector& l) {
  FdrVector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::size_t nulls = 0, count = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (std::fabs(u[j]) >= std::fabs(u[i])) {
        nulls += (l[j] == 0);
        ++count;
      }
    }
    out[i] = static_cast<double>(nulls) / static_cast<double>(count);
  }
  return out;
}

}  // namespace

TEST_CASE("to_pvalues basics") {
  const NullSpec normal = NullSpec::standard_normal();

  SUBCASE("zero statistic gives p = 1") {
    const auto p = to_pvalues({0.0}, normal);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("symmetric statistics give equal p-values") {
    for (const NullSpec& spec : {normal, NullSpec::t(7.0)}) {
      const auto p = to_pvalues({2.3, -2.3}, spec);
      CHECK(p[0] == p[1]);
    }
  }

  SUBCASE("normal quantile check at 0.05") {
    const auto p = to_pvalues({1.959964}, normal);
    CHECK(p[0] == doctest::Approx(0.05).epsilon(1e-5));
  }

  SUBCASE("monotone decreasing in |u|") {
    Rng rng(7);
    StatVector u(200);
    for (double& v : u) v = rng.normal(0, 3);
    for (const NullSpec& spec : {normal, NullSpec::t(4.0)}) {
      const auto p = to_pvalues(u, spec);
      for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < u.size(); ++j)
          if (std::fabs(u[i]) < std::fabs(u[j])) CHECK(p[i] >= p[j]);
    }
  }

  SUBCASE("non-finite statistic is an input error") {
    CHECK_THROWS_AS(to_pvalues({1.0, std::nan("")}, normal), std::invalid_argument);
    CHECK_THROWS_AS(to_pvalues({INFINITY}, normal), std::invalid_argument);
  }

  SUBCASE("t null requires positive df") {
    CHECK_THROWS_AS(to_pvalues({1.0}, NullSpec::t(0.0)), std::invalid_argument);
  }

  SUBCASE("huge statistics clamp to 1e-300, stay in range") {
    const auto p = to_pvalues({500.0}, normal);
    CHECK(p[0] >= 1e-300);
    CHECK(p[0] <= 1.0);
  }
}

TEST_CASE("fdr_to_Fdr") {
  SUBCASE("hand example") {
    const auto Fdr = fdr_to_Fdr({3.0, -1.0, 2.0}, {0.1, 0.9, 0.3});
    CHECK(Fdr[0] == doctest::Approx(0.1));
    CHECK(Fdr[1] == doctest::Approx((0.1 + 0.9 + 0.3) / 3.0));
    CHECK(Fdr[2] == doctest::Approx(0.2));
  }

  SUBCASE("constant fdr stays constant") {
    const auto Fdr = fdr_to_Fdr({5.0, 1.0, -2.0, 0.5}, {0.4, 0.4, 0.4, 0.4});
    for (const double v : Fdr) CHECK(v == doctest::Approx(0.4));
  }

  SUBCASE("largest |u| keeps its own fdr") {
    Rng rng(3);
    StatVector u(50);
    FdrVector fdr(50);
    for (std::size_t i = 0; i < 50; ++i) {
      u[i] = rng.normal();
      fdr[i] = rng.uniform();
    }
    u[17] = 99.0;  // unique largest
    const auto Fdr = fdr_to_Fdr(u, fdr);
    CHECK(Fdr[17] == doctest::Approx(fdr[17]).epsilon(1e-14));
  }

  SUBCASE("matches brute force, with ties") {
    Rng rng(11);
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t n = 2 + rng.integer(199);
      StatVector u(n);
      FdrVector fdr(n);
      for (std::size_t i = 0; i < n; ++i) {
        // Discrete support so |u| ties actually happen.
        u[i] = (static_cast<double>(rng.integer(21)) - 10.0) / 2.0;
        fdr[i] = rng.uniform();
      }
      const auto fast = fdr_to_Fdr(u, fdr);
      const auto slow = brute_force_Fdr(u, fdr);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(fast[i] - slow[i]) <= 1e-12);
    }
  }

  SUBCASE("joint permutation invariance") {
    Rng rng(5);
    const std::size_t n = 64;
    StatVector u(n);
    FdrVector fdr(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = rng.normal();
      fdr[i] = rng.uniform();
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.integer(i + 1)]);
    StatVector up(n);
    FdrVector fp(n);
    for (std::size_t i = 0; i < n; ++i) {
      up[i] = u[perm[i]];
      fp[i] = fdr[perm[i]];
    }
    const auto base = fdr_to_Fdr(u, fdr);
    const auto permuted = fdr_to_Fdr(up, fp);
    for (std::size_t i = 0; i < n; ++i) CHECK(permuted[i] == doctest::Approx(base[perm[i]]).epsilon(1e-14));
  }

  SUBCASE("length mismatch throws") {
    CHECK_THROWS_AS(fdr_to_Fdr({1.0, 2.0}, {0.5}), std::invalid_argument);
  }
}

TEST_CASE("empirical_Fdr") {
  SUBCASE("all null labels give Fdr = 1") {
    const auto Fdr = empirical_Fdr({1.0, -3.0, 0.2}, {0, 0, 0});
    for (const double v : Fdr) CHECK(v == 1.0);
  }

  SUBCASE("all alternative labels give Fdr = 0") {
    const auto Fdr = empirical_Fdr({1.0, -3.0, 0.2}, {1, 1, 1});
    for (const double v : Fdr) CHECK(v == 0.0);
  }

  SUBCASE("hand example") {
    const auto Fdr = empirical_Fdr({3.0, 1.0, 2.0}, {1, 0, 1});
    CHECK(Fdr[0] == 0.0);
    CHECK(Fdr[1] == doctest::Approx(1.0 / 3.0));
    CHECK(Fdr[2] == 0.0);
  }

  SUBCASE("matches tail-count oracle exactly") {
    Rng rng(23);
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t n = 2 + rng.integer(150);
      StatVector u(n);
      LabelVector l(n);
      for (std::size_t i = 0; i < n; ++i) {
        u[i] = (static_cast<double>(rng.integer(15)) - 7.0) / 2.0;
        l[i] = rng.bernoulli(0.3) ? 1 : 0;
      }
      const auto fast = empirical_Fdr(u, l);
      const auto slow = brute_force_empirical_Fdr(u, l);
      for (std::size_t i = 0; i < n; ++i) CHECK(fast[i] == slow[i]);
    }
  }

  SUBCASE("length mismatch throws") {
    CHECK_THROWS_AS(empirical_Fdr({1.0}, {0, 1}), std::invalid_argument);
  }
}

TEST_CASE("mse_loss") {
  CHECK(mse_loss({0.2, 0.8}, {0.2, 0.8}) == 0.0);
  CHECK(mse_loss({0.5, 0.5}, {0.0, 1.0}) == doctest::Approx(0.25));
  CHECK(mse_loss({1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}) == doctest::Approx(1.0));

  SUBCASE("bounded and symmetric") {
    Rng rng(31);
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t n = 1 + rng.integer(40);
      FdrVector a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.uniform();
        b[i] = rng.uniform();
      }
      const double ab = mse_loss(a, b);
      CHECK(ab >= 0.0);
      CHECK(ab <= 1.0);
      CHECK(ab == mse_loss(b, a));
    }
  }

  SUBCASE("length mismatch throws") {
    CHECK_THROWS_AS(mse_loss({0.1}, {0.1, 0.2}), std::invalid_argument);
  }
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
}
