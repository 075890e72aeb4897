#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "fdrsafe/core.hpp"
#include "fdrsafe/generator.hpp"
#include "fdrsafe/grid.hpp"

using namespace fdrsafe;

TEST_CASE("build_grid defaults") {
  const auto grid = build_grid();

  SUBCASE("counts per family and total") {
    std::size_t n_enull = 0, n_gren = 0, n_pval = 0;
    for (const auto& spec : grid) {
      switch (spec.family()) {
        case Family::EmpiricalNull: ++n_enull; break;
        case Family::Grenander: ++n_gren; break;
        case Family::PValue: ++n_pval; break;
      }
    }
    // Cartesian products of the default parameter lists: 2*2*5*4, 1 + 5,
    // and (2*4*2 smoother) + (2*4 bootstrap).
    CHECK(n_enull == 80);
    CHECK(n_gren == 6);
    CHECK(n_pval == 24);
    CHECK(grid.size() == 110);
  }

  SUBCASE("ids unique and sorted") {
    std::set<std::string> ids;
    for (const auto& spec : grid) ids.insert(spec.model_id);
    CHECK(ids.size() == grid.size());
    CHECK(std::is_sorted(grid.begin(), grid.end(), [](const auto& a, const auto& b) {
      return a.model_id < b.model_id;
    }));
  }

  SUBCASE("deterministic across calls") {
    const auto again = build_grid();
    REQUIRE(again.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(again[i].model_id == grid[i].model_id);
  }
}

TEST_CASE("build_grid configuration") {
  SUBCASE("single-family single-point grid") {
    GridConfig cfg;
    cfg.grenander.include = false;
    cfg.pvalue.include = false;
    cfg.empirical_null.nulltypes = {NullFitMethod::Mle};
    cfg.empirical_null.marginals = {MarginalBasisKind::Spline};
    cfg.empirical_null.pct0 = {0.25};
    cfg.empirical_null.pct = {0.0};
    const auto grid = build_grid(cfg);
    CHECK(grid.size() == 1);
    CHECK(grid[0].family() == Family::EmpiricalNull);
  }

  SUBCASE("duplicate values deduplicate before the product") {
    GridConfig cfg;
    cfg.grenander.include = false;
    cfg.pvalue.include = false;
    cfg.empirical_null.nulltypes = {NullFitMethod::Mle, NullFitMethod::Mle};
    cfg.empirical_null.marginals = {MarginalBasisKind::Spline};
    cfg.empirical_null.pct0 = {0.1, 0.1, 0.1};
    cfg.empirical_null.pct = {0.0, 0.0};
    CHECK(build_grid(cfg).size() == 1);
  }

  SUBCASE("no family enabled is a config error") {
    GridConfig cfg;
    cfg.empirical_null.include = false;
    cfg.grenander.include = false;
    cfg.pvalue.include = false;
    CHECK_THROWS_AS(build_grid(cfg), std::invalid_argument);
  }

  SUBCASE("out-of-range values are config errors") {
    GridConfig cfg;
    cfg.empirical_null.pct0 = {0.6};
    CHECK_THROWS_AS(build_grid(cfg), std::invalid_argument);
    cfg = GridConfig{};
    cfg.pvalue.adj = {-1.0};
    CHECK_THROWS_AS(build_grid(cfg), std::invalid_argument);
  }
}

TEST_CASE("fit_model dispatch") {
  const NullSpec null_spec = NullSpec::standard_normal();

  SUBCASE("length-1 input is a fit error for every family") {
    for (const auto& spec :
         {default_empirical_null_spec(), default_grenander_spec(), default_pvalue_spec()}) {
      const FitResult r = fit_model(spec, {1.0}, null_spec);
      CHECK(!r.ok());
      CHECK(r.fit.model_id == spec.model_id);
      CHECK(r.error.find("insufficient") != std::string::npos);
    }
  }

  SUBCASE("pvalue family dispatch equals direct p-value fit") {
    const GeneratorParams phi{0.8, 1.0, 0.3, 2.0, 3.0};
    const SyntheticDataset ds = sample_dataset(phi, 400, 3);
    const ModelSpec spec = default_pvalue_spec();
    const FitResult via_dispatch = fit_model(spec, ds.u, null_spec);
    REQUIRE(via_dispatch.ok());
    const FdrFit direct =
        fit_pvalue_family(to_pvalues(ds.u, null_spec), std::get<PValueParams>(spec.params));
    CHECK(via_dispatch.fit.fdr_hat == direct.fdr_hat);
    CHECK(via_dispatch.fit.pi0_hat == direct.pi0_hat);
  }

  SUBCASE("smoke: all families in range on mixture data") {
    const GeneratorParams phi{0.8, 1.0, 0.5, 2.5, 2.5};
    const auto grid = build_grid();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SyntheticDataset ds = sample_dataset(phi, 600, 1000 + seed);
      for (const auto& spec :
           {default_empirical_null_spec(), default_grenander_spec(), default_pvalue_spec()}) {
        const FitResult r = fit_model(spec, ds.u, null_spec);
        REQUIRE(r.ok());
        CHECK(r.fit.pi0_hat >= 0.0);
        CHECK(r.fit.pi0_hat <= 1.0);
        REQUIRE(r.fit.fdr_hat.size() == ds.u.size());
        for (const double v : r.fit.fdr_hat) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
        for (const double v : r.fit.Fdr_hat) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
      }
    }
  }

  SUBCASE("non-finite statistics become fit errors, not exceptions") {
    StatVector u(100, 1.0);
    u[5] = std::numeric_limits<double>::infinity();
    const FitResult r = fit_model(default_pvalue_spec(), u, null_spec);
    CHECK(!r.ok());
  }
}
