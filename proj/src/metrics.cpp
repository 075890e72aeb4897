#include "fdrsafe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdrsafe/core.hpp"
#include "fdrsafe/rng.hpp"

namespace fdrsafe {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half = kZ95 * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double rmse(const FdrVector& a, const FdrVector& b) { return std::sqrt(mse_loss(a, b)); }

// Nearest-rank percentile of unsorted values at fraction q in [0, 1].
double nearest_rank_percentile(FdrVector values, double q) {
  std::sort(values.begin(), values.end());
  if (q <= 0.0) return values.front();
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::min(values.size() - 1, std::max<std::size_t>(rank, 1) - 1)];
}

}  // namespace

std::optional<double> roc_auc_score(const std::vector<double>& score, const LabelVector& l) {
  require_same_length(score.size(), l.size(), "roc_auc_score");
  const std::size_t n = score.size();
  std::size_t n_pos = 0;
  for (const int v : l) n_pos += (v != 0);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });

  // Midranks with ties, summed over positives.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && score[order[j]] == score[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // (lo + hi) / 2, 1-based
    for (std::size_t k = i; k < j; ++k)
      if (l[order[k]] != 0) rank_sum_pos += midrank;
    i = j;
  }
  const double n1 = static_cast<double>(n_pos), n0 = static_cast<double>(n_neg);
  return (rank_sum_pos - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

std::optional<double> pr_auc_score(const std::vector<double>& score, const LabelVector& l) {
  require_same_length(score.size(), l.size(), "pr_auc_score");
  const std::size_t n = score.size();
  std::size_t n_pos = 0;
  for (const int v : l) n_pos += (v != 0);
  if (n_pos == 0 || n_pos == n) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });

  // Step integral sum (R_k - R_{k-1}) * P_k over descending score groups
  // (ties enter together).
  double auc = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && score[order[j]] == score[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k)
      (l[order[k]] != 0 ? tp : fp) += 1;
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    auc += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return auc;
}

EvalReport evaluate(const FdrFit& fit, const StatVector& u, const LabelVector& l,
                    const std::optional<FdrVector>& fdr_true) {
  require_same_length(fit.fdr_hat.size(), u.size(), "evaluate");
  require_same_length(u.size(), l.size(), "evaluate");
  EvalReport report;
  if (fdr_true) report.fdr_rmse = rmse(fit.fdr_hat, *fdr_true);
  report.Fdr_rmse = rmse(fit.Fdr_hat.size() == u.size() ? fit.Fdr_hat
                                                        : fdr_to_Fdr(u, fit.fdr_hat),
                         empirical_Fdr(u, l));

  double brier = 0.0;
  std::size_t n_null = 0;
  std::vector<double> score(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    score[i] = 1.0 - fit.fdr_hat[i];
    const double d = score[i] - static_cast<double>(l[i]);
    brier += d * d;
    n_null += (l[i] == 0);
  }
  report.brier = brier / static_cast<double>(u.size());
  report.roc_auc = roc_auc_score(score, l);
  report.pr_auc = pr_auc_score(score, l);
  report.pi0_hat = fit.pi0_hat;
  report.pi0_error =
      fit.pi0_hat - static_cast<double>(n_null) / static_cast<double>(u.size());
  return report;
}

CalibrationCurve local_calibration(const FdrVector& fdr_hat, const LabelVector& l,
                                   const CalibrationBins& bins) {
  require_same_length(fdr_hat.size(), l.size(), "local_calibration");
  if (bins.interior < 1 || !(bins.low_edge > 0.0) || !(bins.high_edge < 1.0) ||
      !(bins.low_edge < bins.high_edge))
    throw std::invalid_argument("local_calibration: invalid bin layout");

  // Bin 0: [0, low]; bins 1..interior: even widths over (low, high];
  // last bin: (high, 1].
  const std::size_t n_bins = static_cast<std::size_t>(bins.interior) + 2;
  const double width = (bins.high_edge - bins.low_edge) / bins.interior;
  std::vector<double> sum_x(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0), nulls(n_bins, 0);
  for (std::size_t i = 0; i < fdr_hat.size(); ++i) {
    const double v = fdr_hat[i];
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("local_calibration: fdr value outside [0, 1]");
    std::size_t bin;
    if (v <= bins.low_edge) {
      bin = 0;
    } else if (v > bins.high_edge) {
      bin = n_bins - 1;
    } else {
      bin = 1 + std::min<std::size_t>(bins.interior - 1,
                                      static_cast<std::size_t>((v - bins.low_edge) / width));
      // Half-open bins (lo, hi]: nudge exact left edges down a bin.
      const double left = bins.low_edge + static_cast<double>(bin - 1) * width;
      if (v <= left && bin > 1) --bin;
    }
    sum_x[bin] += v;
    count[bin] += 1;
    nulls[bin] += (l[i] == 0);
  }

  CalibrationCurve curve;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    CalibrationPoint pt;
    pt.x = sum_x[b] / static_cast<double>(count[b]);
    pt.y = static_cast<double>(nulls[b]) / static_cast<double>(count[b]);
    pt.n = count[b];
    std::tie(pt.ci_lo, pt.ci_hi) = wilson_interval(nulls[b], count[b]);
    curve.points.push_back(pt);
  }
  return curve;
}

CalibrationCurve global_calibration(const FdrVector& fdr_hat, const LabelVector& l) {
  require_same_length(fdr_hat.size(), l.size(), "global_calibration");
  if (fdr_hat.empty()) throw std::invalid_argument("global_calibration: empty input");

  std::vector<std::size_t> order(fdr_hat.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return fdr_hat[a] < fdr_hat[b]; });

  CalibrationCurve curve;
  double sum = 0.0;
  std::size_t nulls = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && fdr_hat[order[j]] == fdr_hat[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      sum += fdr_hat[order[k]];
      nulls += (l[order[k]] == 0);
    }
    CalibrationPoint pt;
    pt.n = j;
    pt.x = sum / static_cast<double>(j);
    pt.y = static_cast<double>(nulls) / static_cast<double>(j);
    std::tie(pt.ci_lo, pt.ci_hi) = wilson_interval(nulls, j);
    curve.points.push_back(pt);
    i = j;
  }
  return curve;
}

ClassificationReport classify(const FdrVector& fdr_hat, const LabelVector& l, CutoffRule rule,
                              std::optional<double> pi0_true, std::optional<double> pi0_hat) {
  require_same_length(fdr_hat.size(), l.size(), "classify");
  if (fdr_hat.empty()) throw std::invalid_argument("classify: empty input");

  ClassificationReport report;
  report.rule = rule;
  switch (rule) {
    case CutoffRule::OraclePi0:
      if (!pi0_true) throw std::invalid_argument("classify: oracle_pi0 rule needs pi0_true");
      report.cutoff = nearest_rank_percentile(fdr_hat, 1.0 - *pi0_true);
      break;
    case CutoffRule::EstimatedPi0:
      if (!pi0_hat) throw std::invalid_argument("classify: estimated_pi0 rule needs pi0_hat");
      report.cutoff = nearest_rank_percentile(fdr_hat, 1.0 - *pi0_hat);
      break;
    case CutoffRule::Standard02:
      report.cutoff = 0.2;
      break;
    case CutoffRule::FdrHat005: {
      // Smallest candidate c (unique fdr values) whose below-threshold mean
      // fdr stays at or under 0.05.
      FdrVector sorted(fdr_hat);
      std::sort(sorted.begin(), sorted.end());
      double sum = 0.0;
      bool found = false;
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        sum += sorted[i];
        const bool last_of_group = i + 1 == sorted.size() || sorted[i + 1] != sorted[i];
        if (last_of_group && sum / static_cast<double>(i + 1) <= 0.05) {
          report.cutoff = sorted[i];
          found = true;
        }
      }
      if (!found) {
        report.no_discoveries = true;
        report.cutoff = -1.0;  // below every fdr value
        return report;
      }
      break;
    }
  }

  std::size_t td = 0, fd = 0, n_alt = 0;
  for (std::size_t i = 0; i < fdr_hat.size(); ++i) {
    n_alt += (l[i] != 0);
    if (fdr_hat[i] <= report.cutoff) {
      if (l[i] != 0)
        ++td;
      else
        ++fd;
    }
  }
  report.true_discoveries = td;
  report.false_discoveries = fd;
  report.no_discoveries = (td + fd == 0);
  report.global_FDR =
      td + fd == 0 ? 0.0 : static_cast<double>(fd) / static_cast<double>(td + fd);
  report.sensitivity = n_alt == 0 ? 0.0 : static_cast<double>(td) / static_cast<double>(n_alt);
  return report;
}

std::vector<EvalReport> bootstrap_evaluate(const FdrFit& fit, const StatVector& u,
                                           const LabelVector& l,
                                           const std::optional<FdrVector>& fdr_true,
                                           int n_boot, std::uint64_t seed) {
  require_same_length(fit.fdr_hat.size(), u.size(), "bootstrap_evaluate");
  if (n_boot < 1) throw std::invalid_argument("bootstrap_evaluate: n_boot must be >= 1");
  const std::size_t I = u.size();
  std::vector<EvalReport> reports;
  reports.reserve(n_boot);
  for (int b = 0; b < n_boot; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    FdrFit rfit;
    rfit.model_id = fit.model_id;
    rfit.pi0_hat = fit.pi0_hat;
    StatVector ru(I);
    LabelVector rl(I);
    rfit.fdr_hat.resize(I);
    std::optional<FdrVector> rtruth;
    if (fdr_true) rtruth.emplace(I);
    for (std::size_t i = 0; i < I; ++i) {
      const std::size_t j = rng.integer(I);
      ru[i] = u[j];
      rl[i] = l[j];
      rfit.fdr_hat[i] = fit.fdr_hat[j];
      if (fdr_true) (*rtruth)[i] = (*fdr_true)[j];
    }
    rfit.Fdr_hat = fdr_to_Fdr(ru, rfit.fdr_hat);
    reports.push_back(evaluate(rfit, ru, rl, rtruth));
  }
  return reports;
}

}  // namespace fdrsafe
