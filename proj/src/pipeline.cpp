#include "fdrsafe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "fdrsafe/core.hpp"
#include "fdrsafe/rng.hpp"

namespace fdrsafe {

namespace {

// Seed streams off the master seed.
constexpr std::uint64_t kEmStream = 101;
constexpr std::uint64_t kDatasetStreamBase = 200;
constexpr std::uint64_t kAblationSubsetStream = 301;

}  // namespace

void SafeConfig::validate() const {
  if (n_synthetic < 1) throw std::invalid_argument("SafeConfig: n_synthetic must be >= 1");
  if (ensemble_size < 1) throw std::invalid_argument("SafeConfig: ensemble_size must be >= 1");
  if (n_workers < 1) throw std::invalid_argument("SafeConfig: n_workers must be >= 1");
  grid.validate();
  null_spec.validate();
  em.validate();
}

void parallel_for(std::size_t n, int n_workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const auto workers = static_cast<std::size_t>(std::max(1, n_workers));
  if (workers == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<ObjectiveEstimate> estimate_objectives(const std::vector<ModelSpec>& grid,
                                                   const std::vector<SyntheticDataset>& datasets,
                                                   const NullSpec& null_spec, int n_workers,
                                                   const FitFn& fit_fn) {
  if (grid.empty()) throw std::invalid_argument("estimate_objectives: empty grid");
  if (datasets.empty()) throw std::invalid_argument("estimate_objectives: no synthetic datasets");
  const FitFn& fit = fit_fn ? fit_fn : static_cast<const FitFn&>(FitFn(&fit_model));

  const std::size_t M = grid.size(), N = datasets.size();
  // Loss table addressed by (model, dataset); "" error strings mean success.
  std::vector<double> losses(M * N, 1.0);
  std::vector<std::string> errors(M * N);
  parallel_for(M * N, n_workers, [&](std::size_t task) {
    const std::size_t mi = task / N, di = task % N;
    const SyntheticDataset& ds = datasets[di];
    const FitResult r = fit(grid[mi], ds.u, null_spec);
    if (r.ok())
      losses[task] = mse_loss(r.fit.fdr_hat, ds.fdr_true);
    else
      errors[task] = r.error;
  });

  std::vector<ObjectiveEstimate> out(M);
  for (std::size_t mi = 0; mi < M; ++mi) {
    ObjectiveEstimate& est = out[mi];
    est.model_id = grid[mi].model_id;
    est.per_dataset_losses.resize(N);
    double sum = 0.0;
    for (std::size_t di = 0; di < N; ++di) {
      const std::size_t task = mi * N + di;
      if (!errors[task].empty() && !est.excluded) {
        est.excluded = true;
        est.exclusion_reason =
            "failed on synthetic dataset " + std::to_string(di) + ": " + errors[task];
      }
      est.per_dataset_losses[di] = losses[task];
      sum += losses[task];
    }
    if (est.excluded)
      est.per_dataset_losses.clear();
    else
      est.L_hat = sum / static_cast<double>(N);
  }
  if (std::all_of(out.begin(), out.end(), [](const auto& e) { return e.excluded; }))
    throw PipelineError("scoring", "every model was excluded on the synthetic datasets");
  return out;
}

std::vector<std::string> select_top(const std::vector<ObjectiveEstimate>& objectives, int m) {
  if (m < 1) throw std::invalid_argument("select_top: m must be >= 1");
  std::vector<const ObjectiveEstimate*> eligible;
  for (const auto& est : objectives)
    if (!est.excluded) eligible.push_back(&est);
  if (eligible.empty())
    throw PipelineError("selection", "no non-excluded models to select from");
  std::sort(eligible.begin(), eligible.end(), [](const auto* a, const auto* b) {
    if (a->L_hat != b->L_hat) return a->L_hat < b->L_hat;
    return a->model_id < b->model_id;
  });
  const std::size_t take = std::min<std::size_t>(m, eligible.size());
  std::vector<std::string> ids(take);
  for (std::size_t i = 0; i < take; ++i) ids[i] = eligible[i]->model_id;
  return ids;
}

EnsembleResult ensemble(const StatVector& u, const std::vector<FitResult>& fits_on_observed,
                        const std::vector<ObjectiveEstimate>& objectives) {
  if (fits_on_observed.empty())
    throw std::invalid_argument("ensemble: no selected models");

  EnsembleResult result;
  std::vector<const FdrFit*> survivors;
  std::vector<double> l_hats;
  for (const FitResult& r : fits_on_observed) {
    if (!r.ok()) {
      result.dropped_on_observed.emplace_back(r.fit.model_id, r.error);
      continue;
    }
    const auto it = std::find_if(objectives.begin(), objectives.end(), [&](const auto& est) {
      return est.model_id == r.fit.model_id;
    });
    if (it == objectives.end() || it->excluded)
      throw std::invalid_argument("ensemble: no objective estimate for model " + r.fit.model_id);
    survivors.push_back(&r.fit);
    l_hats.push_back(it->L_hat);
  }
  if (survivors.empty())
    throw PipelineError("ensemble", "every selected model failed on the observed data");

  double denom = 0.0;
  for (const double l : l_hats) denom += 1.0 - l;
  std::vector<double> weights(survivors.size());
  if (denom > 0.0) {
    for (std::size_t k = 0; k < survivors.size(); ++k) weights[k] = (1.0 - l_hats[k]) / denom;
  } else {
    // All losses at the maximum: fall back to equal weights.
    std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(survivors.size()));
  }

  const std::size_t I = u.size();
  result.fdr_hat.assign(I, 0.0);
  result.pi0_hat = 0.0;
  for (std::size_t k = 0; k < survivors.size(); ++k) {
    const FdrFit& fit = *survivors[k];
    require_same_length(fit.fdr_hat.size(), I, "ensemble");
    result.selected.push_back({fit.model_id, weights[k], l_hats[k]});
    result.pi0_hat += weights[k] * fit.pi0_hat;
    for (std::size_t i = 0; i < I; ++i) result.fdr_hat[i] += weights[k] * fit.fdr_hat[i];
  }
  for (double& v : result.fdr_hat) v = std::clamp(v, 0.0, 1.0);
  result.pi0_hat = std::clamp(result.pi0_hat, 0.0, 1.0);
  result.Fdr_hat = fdr_to_Fdr(u, result.fdr_hat);
  return result;
}

namespace {

std::vector<SyntheticDataset> draw_synthetic(const GeneratorParams& phi, std::size_t size,
                                             int n, std::uint64_t seed) {
  std::vector<SyntheticDataset> datasets;
  datasets.reserve(n);
  for (int i = 0; i < n; ++i)
    datasets.push_back(
        sample_dataset(phi, size, derive_seed(seed, kDatasetStreamBase + static_cast<std::uint64_t>(i))));
  return datasets;
}

std::vector<FitResult> fit_many(const std::vector<ModelSpec>& specs, const StatVector& u,
                                const NullSpec& null_spec, int n_workers) {
  std::vector<FitResult> fits(specs.size());
  parallel_for(specs.size(), n_workers,
               [&](std::size_t i) { fits[i] = fit_model(specs[i], u, null_spec); });
  return fits;
}

std::vector<ModelSpec> specs_by_id(const std::vector<ModelSpec>& grid,
                                   const std::vector<std::string>& ids) {
  std::vector<ModelSpec> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    const auto it = std::find_if(grid.begin(), grid.end(),
                                 [&](const ModelSpec& s) { return s.model_id == id; });
    if (it == grid.end())
      throw std::invalid_argument("model id not in grid: " + id);
    out.push_back(*it);
  }
  return out;
}

// Equal-weight ensemble over the given observed fits (aggregation ablations
// never see synthetic losses).
EnsembleResult equal_weight_ensemble(const StatVector& u, const std::vector<FitResult>& fits) {
  std::vector<const FdrFit*> survivors;
  EnsembleResult result;
  for (const FitResult& r : fits) {
    if (r.ok())
      survivors.push_back(&r.fit);
    else
      result.dropped_on_observed.emplace_back(r.fit.model_id, r.error);
  }
  if (survivors.empty())
    throw PipelineError("ensemble", "every model failed on the observed data");
  const double w = 1.0 / static_cast<double>(survivors.size());
  const std::size_t I = u.size();
  result.fdr_hat.assign(I, 0.0);
  result.pi0_hat = 0.0;
  for (const FdrFit* fit : survivors) {
    result.selected.push_back({fit->model_id, w, std::numeric_limits<double>::quiet_NaN()});
    result.pi0_hat += w * fit->pi0_hat;
    for (std::size_t i = 0; i < I; ++i) result.fdr_hat[i] += w * fit->fdr_hat[i];
  }
  for (double& v : result.fdr_hat) v = std::clamp(v, 0.0, 1.0);
  result.pi0_hat = std::clamp(result.pi0_hat, 0.0, 1.0);
  result.Fdr_hat = fdr_to_Fdr(u, result.fdr_hat);
  return result;
}

}  // namespace

ScoredPipeline score_grid(const StatVector& u, const SafeConfig& cfg) {
  ScoredPipeline scored;
  try {
    scored.phi = fit_em(u, cfg.em, derive_seed(cfg.seed, kEmStream)).params;
  } catch (const FitError& e) {
    throw PipelineError("generator-fit", e.what());
  }
  const std::size_t synth_size = cfg.synthetic_size > 0 ? cfg.synthetic_size : u.size();
  scored.datasets = draw_synthetic(scored.phi, synth_size, cfg.n_synthetic, cfg.seed);
  scored.grid = build_grid(cfg.grid);
  scored.objectives = estimate_objectives(scored.grid, scored.datasets, cfg.null_spec, cfg.n_workers);
  return scored;
}

EnsembleResult ensemble_from_scores(const StatVector& u, const SafeConfig& cfg,
                                    const ScoredPipeline& scored, int m) {
  const std::vector<std::string> top = select_top(scored.objectives, m);
  const std::vector<FitResult> fits =
      fit_many(specs_by_id(scored.grid, top), u, cfg.null_spec, cfg.n_workers);
  EnsembleResult result = ensemble(u, fits, scored.objectives);
  result.diagnostics = scored.objectives;
  return result;
}

EnsembleResult run_fdrsafe(const StatVector& u, const SafeConfig& cfg) {
  cfg.validate();
  const ScoredPipeline scored = score_grid(u, cfg);
  return ensemble_from_scores(u, cfg, scored, cfg.ensemble_size);
}

EnsembleResult run_ablation(const StatVector& u, const SafeConfig& cfg, AblationVariant variant) {
  cfg.validate();
  if (variant == AblationVariant::SelectionOnly) {
    const ScoredPipeline scored = score_grid(u, cfg);
    return ensemble_from_scores(u, cfg, scored, 1);
  }

  const std::vector<ModelSpec> grid = build_grid(cfg.grid);
  const std::vector<FitResult> all_fits = fit_many(grid, u, cfg.null_spec, cfg.n_workers);

  if (variant == AblationVariant::AggregationAll) return equal_weight_ensemble(u, all_fits);

  // aggregation_only: a seeded uniform subset of m of the models that fit.
  std::vector<std::size_t> ok_idx;
  for (std::size_t i = 0; i < all_fits.size(); ++i)
    if (all_fits[i].ok()) ok_idx.push_back(i);
  if (ok_idx.empty())
    throw PipelineError("ensemble", "every model failed on the observed data");
  const std::size_t m = std::min<std::size_t>(cfg.ensemble_size, ok_idx.size());
  Rng rng(derive_seed(cfg.seed, kAblationSubsetStream));
  // Partial Fisher-Yates over the eligible indices.
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = k + rng.integer(ok_idx.size() - k);
    std::swap(ok_idx[k], ok_idx[j]);
  }
  std::vector<FitResult> subset;
  subset.reserve(m);
  for (std::size_t k = 0; k < m; ++k) subset.push_back(all_fits[ok_idx[k]]);
  std::sort(subset.begin(), subset.end(), [](const FitResult& a, const FitResult& b) {
    return a.fit.model_id < b.fit.model_id;
  });
  EnsembleResult result = equal_weight_ensemble(u, subset);
  // Subset members all fit already; drops list applies to the full grid run.
  for (const FitResult& r : all_fits)
    if (!r.ok()) result.dropped_on_observed.emplace_back(r.fit.model_id, r.error);
  return result;
}

double objective_variance(const ObjectiveEstimate& est) {
  const std::size_t n = est.per_dataset_losses.size();
  if (n < 2)
    throw std::invalid_argument("objective_variance: needs at least 2 per-dataset losses");
  double mean = 0.0;
  for (const double l : est.per_dataset_losses) mean += l;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const double l : est.per_dataset_losses) ss += (l - mean) * (l - mean);
  const double sample_var = ss / static_cast<double>(n - 1);
  return sample_var / static_cast<double>(n);
}

Chi2Estimate chi2_divergence_1d(const GeneratorParams& phi_g, const GeneratorParams& phi_p,
                                std::size_t n_mc, std::uint64_t seed) {
  phi_g.validate();
  phi_p.validate();
  if (n_mc < 1000) throw std::invalid_argument("chi2_divergence_1d: n_mc must be >= 1000");
  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n_mc; ++i) {
    // One draw from the phi_p marginal.
    double x;
    if (!rng.bernoulli(1.0 - phi_p.pi0)) {
      x = rng.normal(0.0, phi_p.sigma0);
    } else {
      const bool negative = rng.bernoulli(phi_p.pi1n);
      const double sigma = negative ? phi_p.sigma1n : phi_p.sigma1p;
      const double magnitude = sigma * std::sqrt(rng.chi2_3());
      x = negative ? -magnitude : magnitude;
    }
    const double fp = eval_densities(x, phi_p).f;
    const double fg = eval_densities(x, phi_g).f;
    const double term = fp > 0.0 ? (fg / fp - 1.0) * (fg / fp - 1.0) : 0.0;
    sum += term;
    sum_sq += term * term;
  }
  Chi2Estimate est;
  est.n_mc = n_mc;
  est.value = sum / static_cast<double>(n_mc);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n_mc) - est.value * est.value);
  est.std_error = std::sqrt(var / static_cast<double>(n_mc));
  return est;
}

}  // namespace fdrsafe
