#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "fdrsafe/metrics.hpp"
#include "fdrsafe/pipeline.hpp"
#include "fdrsafe/types.hpp"

namespace fdrsafe {

enum class ScenarioKind { Symmetric, Asymmetric, Correlated };
enum class CovKind { Equicorrelated, Ar1 };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Symmetric;
  std::size_t I = 1000;
  double pi0 = 0.8;
  // Correlated scenario only: block covariance, group sizes, offsets.
  CovKind cov = CovKind::Equicorrelated;
  double rho = 0.3;
  std::size_t block_size = 10;
  std::size_t n_a = 10, n_b = 10;
  double offset_mean = 2.0, offset_sd = 0.5;
  double neg_prob = 0.2;

  void validate() const;
};

struct ScenarioData {
  StatVector u;
  LabelVector l;
  std::optional<FdrVector> fdr_true;  // absent for the correlated scenario
};

// Null N(0,1), alternatives a half/half mixture of Uniform(-4, -1.33) and
// Uniform(1.33, 4); true fdr in closed form.
ScenarioData gen_symmetric(const ScenarioSpec& spec, std::uint64_t seed);
double symmetric_true_fdr_at(double u, double pi0);

// Null N(0,1), alternatives 1/3 Uniform(-6, -2.5) + 2/3 Uniform(1.5, 4.5).
ScenarioData gen_asymmetric(const ScenarioSpec& spec, std::uint64_t seed);
double asymmetric_true_fdr_at(double u, double pi0);

// Two groups of correlated expression draws; Welch two-sample t statistics,
// labels only (no closed-form fdr).
ScenarioData gen_correlated(const ScenarioSpec& spec, std::uint64_t seed);

ScenarioData generate_scenario(const ScenarioSpec& spec, std::uint64_t seed);

// Welch-style two-sample t statistics per coordinate; rows are coordinates,
// columns samples.
StatVector welch_t_statistics(const std::vector<std::vector<double>>& xa,
                              const std::vector<std::vector<double>>& xb);

struct OraclePair {
  EnsembleResult single;    // argmin of the true loss over fitted grid models
  EnsembleResult ensemble;  // top-m by true loss, 1 - loss weights
  std::vector<std::string> fitted_ids;
  std::vector<double> true_losses;  // aligned with fitted_ids
};

// Ground-truth comparators (simulation only).
OraclePair oracle_methods(const StatVector& u, const FdrVector& fdr_true,
                          const std::vector<ModelSpec>& grid, int m, const NullSpec& null_spec,
                          int n_workers = 1);

struct StudyRow {
  std::string method;
  int rep = 0;
  std::string metric;
  double value = 0.0;
};

struct StudyResult {
  std::vector<std::string> methods;
  int reps = 0;
  std::vector<StudyRow> rows;
  // Share of fdrSAFE-selected models per family, pooled over repetitions.
  std::map<std::string, double> family_share;

  std::map<std::string, std::map<std::string, double>> medians() const;
};

struct StudyConfig {
  ScenarioSpec scenario;
  int reps = 50;
  std::vector<std::string> methods;  // empty means: all methods
  SafeConfig safe;                   // null_spec is overridden per scenario
};

// All method names understood by run_study, in canonical order.
const std::vector<std::string>& study_method_names();

// Per repetition: generate data, run every requested method, evaluate.
// Failures are recorded as missing rows; the result is a pure function of
// (config, master_seed).
StudyResult run_study(const StudyConfig& cfg, std::uint64_t master_seed);

}  // namespace fdrsafe
