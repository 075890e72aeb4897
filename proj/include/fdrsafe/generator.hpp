#pragma once

#include <cstdint>

#include "fdrsafe/types.hpp"

namespace fdrsafe {

// Five-parameter two-group mixture: Normal(0, sigma0) null plus an
// alternative made of two nonlocal half components (u^2-tilted Normals of
// opposite sign), with pi1n the share of negative alternatives.
struct GeneratorParams {
  double pi0 = 0.8;
  double sigma0 = 1.0;
  double pi1n = 0.5;
  double sigma1n = 2.0;
  double sigma1p = 2.0;

  void validate() const;
};

struct Densities {
  double f0 = 0.0;  // null density at u
  double f1 = 0.0;  // alternative density at u
  double f = 0.0;   // pi0*f0 + (1-pi0)*f1
};

Densities eval_densities(double u, const GeneratorParams& phi);

struct EmConfig {
  int max_iter = 500;
  double tol = 1e-8;  // relative log-likelihood change
  int n_restarts = 5;

  void validate() const;
};

struct EmFit {
  GeneratorParams params;
  double log_lik = 0.0;
  bool converged = false;
  int iterations = 0;
  int restart = 0;  // index of the winning restart
  // Per-restart log-likelihood sequences, in iteration order.
  std::vector<std::vector<double>> ll_traces;
};

// Maximum-likelihood fit of the generator by EM over {null, negative-alt,
// positive-alt} responsibilities, best of n_restarts. Throws FitError on
// degenerate input (fewer than 10 statistics, all zeros, non-finite values).
EmFit fit_em(const StatVector& u, const EmConfig& cfg = {}, std::uint64_t seed = 0);

struct SyntheticDataset {
  StatVector u;
  FdrVector fdr_true;
  LabelVector l;
  std::uint64_t seed = 0;
};

// Draws labels Bernoulli(1-pi0) and statistics from the label-specific
// component; alternative magnitudes use sigma * sqrt(chi2_3), the
// representation of the u^2-tilted half Normal. Bit-reproducible per seed.
SyntheticDataset sample_dataset(const GeneratorParams& phi, std::size_t I,
                                std::uint64_t seed);

double true_fdr_at(double u, const GeneratorParams& phi);
FdrVector true_fdr(const StatVector& u, const GeneratorParams& phi);

}  // namespace fdrsafe
