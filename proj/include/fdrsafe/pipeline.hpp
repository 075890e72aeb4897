#pragma once

#include <cstdint>
#include <functional>

#include "fdrsafe/generator.hpp"
#include "fdrsafe/grid.hpp"
#include "fdrsafe/types.hpp"

namespace fdrsafe {

// Per-model objective over the synthetic datasets. A model must fit every
// dataset to stay eligible; otherwise it is excluded with the first reason.
struct ObjectiveEstimate {
  std::string model_id;
  std::vector<double> per_dataset_losses;
  double L_hat = 1.0;
  bool excluded = false;
  std::string exclusion_reason;
};

struct SelectedModel {
  std::string model_id;
  double weight = 0.0;
  double L_hat = 0.0;
};

struct EnsembleResult {
  std::vector<SelectedModel> selected;
  double pi0_hat = 1.0;
  FdrVector fdr_hat;
  FdrVector Fdr_hat;
  std::vector<ObjectiveEstimate> diagnostics;  // full per-model table
  // Models selected on synthetic data that then failed on the observed data.
  std::vector<std::pair<std::string, std::string>> dropped_on_observed;
};

struct SafeConfig {
  int n_synthetic = 10;
  int ensemble_size = 10;
  std::size_t synthetic_size = 0;  // 0 means: use the observed I
  std::uint64_t seed = 0;
  int n_workers = 1;
  GridConfig grid;
  NullSpec null_spec;
  EmConfig em;

  void validate() const;
};

using FitFn = std::function<FitResult(const ModelSpec&, const StatVector&, const NullSpec&)>;

// Runs fn(0..n-1) on up to n_workers threads; tasks must be independent.
void parallel_for(std::size_t n, int n_workers, const std::function<void(std::size_t)>& fn);

// Scores every grid model on every synthetic dataset (MSE against the known
// fdr), in parallel over (model, dataset) pairs with deterministic
// collection. fit_fn defaults to fit_model; tests may inject a stub.
std::vector<ObjectiveEstimate> estimate_objectives(const std::vector<ModelSpec>& grid,
                                                   const std::vector<SyntheticDataset>& datasets,
                                                   const NullSpec& null_spec, int n_workers = 1,
                                                   const FitFn& fit_fn = {});

// Non-excluded model ids ordered by (L_hat, model_id), first min(m, count).
std::vector<std::string> select_top(const std::vector<ObjectiveEstimate>& objectives, int m);

// Weighted ensemble of the selected models' fits on the observed data.
// Fits with errors are dropped and the weights renormalized; throws
// PipelineError when nothing survives.
EnsembleResult ensemble(const StatVector& u, const std::vector<FitResult>& fits_on_observed,
                        const std::vector<ObjectiveEstimate>& objectives);

// Intermediate state after the synthetic-data scoring stage; lets callers
// derive several ensembles (different m) without re-scoring the grid.
struct ScoredPipeline {
  GeneratorParams phi;
  std::vector<SyntheticDataset> datasets;
  std::vector<ModelSpec> grid;
  std::vector<ObjectiveEstimate> objectives;
};

// EM generator fit, N synthetic datasets, objective scoring.
ScoredPipeline score_grid(const StatVector& u, const SafeConfig& cfg);

// Top-m selection, observed fits, weighted ensemble from prior scores.
EnsembleResult ensemble_from_scores(const StatVector& u, const SafeConfig& cfg,
                                    const ScoredPipeline& scored, int m);

// Full fdrSAFE: EM generator fit, N synthetic datasets, objective scoring,
// top-m selection, weighted ensemble on the observed statistics.
EnsembleResult run_fdrsafe(const StatVector& u, const SafeConfig& cfg);

enum class AblationVariant { SelectionOnly, AggregationOnly, AggregationAll };

// selection_only keeps the single best-scored model; the aggregation
// variants skip synthetic scoring and equally weight a random subset of m
// models (aggregation_only) or every model that fits (aggregation_all).
EnsembleResult run_ablation(const StatVector& u, const SafeConfig& cfg, AblationVariant variant);

// Estimated variance of L_hat: sample variance of the per-dataset losses
// divided by N. Requires N >= 2.
double objective_variance(const ObjectiveEstimate& est);

struct Chi2Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_mc = 0;
};

// Monte Carlo estimate of the one-dimensional Pearson chi^2 divergence
// E_P[(f_G(u)/f_P(u) - 1)^2] with u drawn from the phi_p marginal.
Chi2Estimate chi2_divergence_1d(const GeneratorParams& phi_g, const GeneratorParams& phi_p,
                                std::size_t n_mc, std::uint64_t seed);

}  // namespace fdrsafe
