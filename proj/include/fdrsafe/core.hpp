#pragma once

#include "fdrsafe/types.hpp"

namespace fdrsafe {

// Two-sided p-values p_i = 2*(1 - F(|u_i|)) under the null. Throws on
// non-finite statistics.
std::vector<double> to_pvalues(const StatVector& u, const NullSpec& null_spec);

// Tail-end Fdr from local fdr: Fdr_i is the mean of fdr over the tail set
// {i' : |u_i'| >= |u_i|}. Statistics with exactly equal |u| belong to each
// other's tail sets.
FdrVector fdr_to_Fdr(const StatVector& u, const FdrVector& fdr);

// Empirical tail-end Fdr from known labels: fraction of nulls (l = 0) in the
// tail set of each statistic.
FdrVector empirical_Fdr(const StatVector& u, const LabelVector& l);

// Mean squared error between two fdr vectors; in [0, 1] for valid inputs.
double mse_loss(const FdrVector& fdr_hat, const FdrVector& fdr_true);

}  // namespace fdrsafe
