#pragma once

#include <cstdint>
#include <optional>

#include "fdrsafe/types.hpp"

namespace fdrsafe {

struct EvalReport {
  std::optional<double> fdr_rmse;  // needs true fdr
  double Fdr_rmse = 0.0;           // against the empirical tail-end Fdr
  double brier = 0.0;
  std::optional<double> pr_auc;    // absent when labels are single-class
  std::optional<double> roc_auc;
  double pi0_hat = 1.0;
  double pi0_error = 0.0;          // pi0_hat minus the realized null fraction
};

// Metrics of one fit against known labels (and true fdr when available).
// Scores for both AUCs are 1 - fdr_hat; ROC uses the rank (Mann-Whitney)
// form with half credit for ties, PR the step-interpolated integral.
EvalReport evaluate(const FdrFit& fit, const StatVector& u, const LabelVector& l,
                    const std::optional<FdrVector>& fdr_true = std::nullopt);

// Exact tie-aware ROC AUC of score against labels (1 = positive).
// Returns nullopt when only one class is present.
std::optional<double> roc_auc_score(const std::vector<double>& score, const LabelVector& l);
std::optional<double> pr_auc_score(const std::vector<double>& score, const LabelVector& l);

struct CalibrationPoint {
  double x = 0.0;  // mean predicted fdr in the bin / below the threshold
  double y = 0.0;  // observed fraction null
  std::size_t n = 0;
  double ci_lo = 0.0, ci_hi = 1.0;  // 95% Wilson interval for y
};

struct CalibrationCurve {
  std::vector<CalibrationPoint> points;
};

struct CalibrationBins {
  int interior = 20;        // even-width bins over (low_edge, high_edge]
  double low_edge = 0.01;   // first bin is [0, low_edge]
  double high_edge = 0.99;  // last bin is (high_edge, 1]
};

// Binned reliability of local fdr values: mean predicted vs observed null
// fraction per bin, empty bins omitted.
CalibrationCurve local_calibration(const FdrVector& fdr_hat, const LabelVector& l,
                                   const CalibrationBins& bins = {});

// Global FDR calibration: thresholds at every unique fdr value, estimated
// (mean fdr below threshold) vs true (null fraction below threshold).
CalibrationCurve global_calibration(const FdrVector& fdr_hat, const LabelVector& l);

enum class CutoffRule { OraclePi0, EstimatedPi0, Standard02, FdrHat005 };

struct ClassificationReport {
  CutoffRule rule = CutoffRule::Standard02;
  double cutoff = 0.2;
  bool no_discoveries = false;
  double global_FDR = 0.0;
  double sensitivity = 0.0;
  std::size_t true_discoveries = 0;
  std::size_t false_discoveries = 0;
};

// Classifies hypotheses as discoveries (fdr_hat <= cutoff) under one of the
// four cutoff rules; pi0_true is required for OraclePi0, pi0_hat for
// EstimatedPi0.
ClassificationReport classify(const FdrVector& fdr_hat, const LabelVector& l, CutoffRule rule,
                              std::optional<double> pi0_true = std::nullopt,
                              std::optional<double> pi0_hat = std::nullopt);

// Bootstrap resampling of hypotheses: recomputes evaluate() on each
// index-resampled replicate.
std::vector<EvalReport> bootstrap_evaluate(const FdrFit& fit, const StatVector& u,
                                           const LabelVector& l,
                                           const std::optional<FdrVector>& fdr_true,
                                           int n_boot, std::uint64_t seed);

}  // namespace fdrsafe
