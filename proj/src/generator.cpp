#include "fdrsafe/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fdrsafe/dist.hpp"
#include "fdrsafe/rng.hpp"

namespace fdrsafe {

namespace {

constexpr double kPropMin = 1e-6;
constexpr double kPropMax = 1.0 - 1e-6;
constexpr double kScaleMin = 1e-6;

double clamp_prop(double p) { return std::clamp(p, kPropMin, kPropMax); }

// Density of the u^2-tilted half Normal on one sign branch, without the
// mixing weight: (2u^2/sigma^2) * N(u; 0, sigma). Integrates to 1 over its
// half line.
double half_component(double u, double sigma) {
  return 2.0 * u * u / (sigma * sigma) * norm_pdf(u, sigma);
}

double log_half_component(double u, double sigma) {
  return std::log(2.0 * u * u / (sigma * sigma)) + norm_log_pdf(u, sigma);
}

struct Accum {
  double r0 = 0.0, rn = 0.0, rp = 0.0;
  double r0_u2 = 0.0, rn_u2 = 0.0, rp_u2 = 0.0;
  double log_lik = 0.0;
};

// One E-step pass: responsibilities over {null, negative-alt, positive-alt}
// plus the log-likelihood, accumulated in index order.
Accum e_step(const StatVector& u, const GeneratorParams& phi) {
  Accum acc;
  const double log_pi0 = std::log(phi.pi0);
  const double log_pi1n = std::log((1.0 - phi.pi0) * phi.pi1n);
  const double log_pi1p = std::log((1.0 - phi.pi0) * (1.0 - phi.pi1n));
  for (const double x : u) {
    const double w0 = phi.pi0 * norm_pdf(x, phi.sigma0);
    const double wn = x < 0.0 ? (1.0 - phi.pi0) * phi.pi1n * half_component(x, phi.sigma1n) : 0.0;
    const double wp = x > 0.0 ? (1.0 - phi.pi0) * (1.0 - phi.pi1n) * half_component(x, phi.sigma1p) : 0.0;
    const double s = w0 + wn + wp;
    double r0, rn, rp, ll_i;
    if (s > 0.0 && std::isfinite(s)) {
      r0 = w0 / s;
      rn = wn / s;
      rp = wp / s;
      ll_i = std::log(s);
    } else {
      // Far-tail underflow: redo this point in log space.
      const double l0 = log_pi0 + norm_log_pdf(x, phi.sigma0);
      const double ln = x < 0.0 ? log_pi1n + log_half_component(x, phi.sigma1n)
                                : -std::numeric_limits<double>::infinity();
      const double lp = x > 0.0 ? log_pi1p + log_half_component(x, phi.sigma1p)
                                : -std::numeric_limits<double>::infinity();
      const double m = std::max({l0, ln, lp});
      const double e0 = std::exp(l0 - m);
      const double en = std::isfinite(ln) ? std::exp(ln - m) : 0.0;
      const double ep = std::isfinite(lp) ? std::exp(lp - m) : 0.0;
      const double es = e0 + en + ep;
      r0 = e0 / es;
      rn = en / es;
      rp = ep / es;
      ll_i = m + std::log(es);
    }
    acc.r0 += r0;
    acc.rn += rn;
    acc.rp += rp;
    acc.r0_u2 += r0 * x * x;
    acc.rn_u2 += rn * x * x;
    acc.rp_u2 += rp * x * x;
    acc.log_lik += ll_i;
  }
  return acc;
}

GeneratorParams m_step(const Accum& acc, const GeneratorParams& prev, std::size_t n) {
  GeneratorParams next = prev;
  next.pi0 = clamp_prop(acc.r0 / static_cast<double>(n));
  const double alt_mass = acc.rn + acc.rp;
  if (alt_mass > 1e-300) next.pi1n = clamp_prop(acc.rn / alt_mass);
  if (acc.r0 > 1e-300)
    next.sigma0 = std::max(kScaleMin, std::sqrt(acc.r0_u2 / acc.r0));
  // u^2-tilted half Normal is Maxwell-type: sigma^2 MLE has a factor 3.
  if (acc.rn > 1e-300)
    next.sigma1n = std::max(kScaleMin, std::sqrt(acc.rn_u2 / (3.0 * acc.rn)));
  if (acc.rp > 1e-300)
    next.sigma1p = std::max(kScaleMin, std::sqrt(acc.rp_u2 / (3.0 * acc.rp)));
  return next;
}

double quantile_of_sorted(const std::vector<double>& xs, double q) {
  if (xs.empty()) return 0.0;
  const double h = (static_cast<double>(xs.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[lo + 1] - xs[lo]);
}

GeneratorParams moment_start(const StatVector& u) {
  std::vector<double> sorted(u);
  std::sort(sorted.begin(), sorted.end());
  GeneratorParams start;
  start.pi0 = 0.8;
  const double iqr = quantile_of_sorted(sorted, 0.75) - quantile_of_sorted(sorted, 0.25);
  start.sigma0 = std::max(iqr / 1.349, 1e-3);
  const double edge = 2.0 * start.sigma0;
  std::size_t n_tail = 0, n_neg = 0;
  double neg_u2 = 0.0, pos_u2 = 0.0;
  std::size_t n_pos = 0;
  for (const double x : u) {
    if (std::fabs(x) <= edge) continue;
    ++n_tail;
    if (x < 0.0) {
      ++n_neg;
      neg_u2 += x * x;
    } else {
      ++n_pos;
      pos_u2 += x * x;
    }
  }
  start.pi1n = n_tail == 0 ? 0.5
                           : clamp_prop(static_cast<double>(n_neg) / static_cast<double>(n_tail));
  // E[u^2] = 3 sigma^2 for the tilted half Normal.
  start.sigma1n = n_neg > 0 ? std::sqrt(neg_u2 / (3.0 * static_cast<double>(n_neg)))
                            : 2.0 * start.sigma0;
  start.sigma1p = n_pos > 0 ? std::sqrt(pos_u2 / (3.0 * static_cast<double>(n_pos)))
                            : 2.0 * start.sigma0;
  start.sigma1n = std::max(start.sigma1n, kScaleMin);
  start.sigma1p = std::max(start.sigma1p, kScaleMin);
  return start;
}

}  // namespace

void GeneratorParams::validate() const {
  const bool props_ok = pi0 >= 0.0 && pi0 <= 1.0 && pi1n >= 0.0 && pi1n <= 1.0;
  const bool scales_ok = sigma0 > 0.0 && std::isfinite(sigma0) && sigma1n > 0.0 &&
                         std::isfinite(sigma1n) && sigma1p > 0.0 && std::isfinite(sigma1p);
  if (!props_ok || !scales_ok)
    throw std::invalid_argument("GeneratorParams: proportions must be in [0,1], scales positive finite");
}

void EmConfig::validate() const {
  if (max_iter < 1 || !(tol > 0.0) || n_restarts < 1)
    throw std::invalid_argument("EmConfig: max_iter, tol, n_restarts must be positive");
}

Densities eval_densities(double u, const GeneratorParams& phi) {
  phi.validate();
  Densities d;
  d.f0 = norm_pdf(u, phi.sigma0);
  if (u < 0.0)
    d.f1 = phi.pi1n * half_component(u, phi.sigma1n);
  else if (u > 0.0)
    d.f1 = (1.0 - phi.pi1n) * half_component(u, phi.sigma1p);
  d.f = phi.pi0 * d.f0 + (1.0 - phi.pi0) * d.f1;
  return d;
}

EmFit fit_em(const StatVector& u, const EmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (u.size() < 10)
    throw FitError("fit_em: need at least 10 statistics, got " + std::to_string(u.size()));
  bool any_nonzero = false;
  for (const double x : u) {
    if (!std::isfinite(x)) throw FitError("fit_em: non-finite statistic");
    any_nonzero = any_nonzero || x != 0.0;
  }
  if (!any_nonzero) throw FitError("fit_em: all statistics are zero");

  const GeneratorParams base = moment_start(u);
  EmFit best;
  best.log_lik = -std::numeric_limits<double>::infinity();
  best.ll_traces.resize(cfg.n_restarts);

  for (int restart = 0; restart < cfg.n_restarts; ++restart) {
    GeneratorParams phi = base;
    if (restart > 0) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
      phi.pi0 = clamp_prop(base.pi0 * rng.uniform(0.7, 1.3));
      phi.sigma0 = std::max(kScaleMin, base.sigma0 * rng.uniform(0.7, 1.3));
      phi.pi1n = clamp_prop(base.pi1n * rng.uniform(0.7, 1.3));
      phi.sigma1n = std::max(kScaleMin, base.sigma1n * rng.uniform(0.7, 1.3));
      phi.sigma1p = std::max(kScaleMin, base.sigma1p * rng.uniform(0.7, 1.3));
    }

    std::vector<double>& trace = best.ll_traces[restart];
    double prev_ll = -std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
      const Accum acc = e_step(u, phi);
      if (!std::isfinite(acc.log_lik)) throw FitError("fit_em: non-finite likelihood");
      trace.push_back(acc.log_lik);
      if (iter > 0 && std::fabs(acc.log_lik - prev_ll) <=
                          cfg.tol * (std::fabs(prev_ll) + 1.0)) {
        converged = true;
        prev_ll = acc.log_lik;
        break;
      }
      prev_ll = acc.log_lik;
      phi = m_step(acc, phi, u.size());
    }
    if (prev_ll > best.log_lik) {
      best.params = phi;
      best.log_lik = prev_ll;
      best.converged = converged;
      best.iterations = static_cast<int>(trace.size());
      best.restart = restart;
    }
  }
  return best;
}

SyntheticDataset sample_dataset(const GeneratorParams& phi, std::size_t I,
                                std::uint64_t seed) {
  phi.validate();
  if (I < 1) throw std::invalid_argument("sample_dataset: I must be >= 1");
  SyntheticDataset ds;
  ds.seed = seed;
  ds.u.resize(I);
  ds.l.resize(I);
  Rng rng(seed);
  for (std::size_t i = 0; i < I; ++i) {
    const bool alt = rng.bernoulli(1.0 - phi.pi0);
    ds.l[i] = alt ? 1 : 0;
    if (!alt) {
      ds.u[i] = rng.normal(0.0, phi.sigma0);
    } else {
      const bool negative = rng.bernoulli(phi.pi1n);
      const double sigma = negative ? phi.sigma1n : phi.sigma1p;
      const double magnitude = sigma * std::sqrt(rng.chi2_3());
      ds.u[i] = negative ? -magnitude : magnitude;
    }
  }
  ds.fdr_true = true_fdr(ds.u, phi);
  return ds;
}

double true_fdr_at(double u, const GeneratorParams& phi) {
  const Densities d = eval_densities(u, phi);
  if (!(d.f > 0.0)) return 1.0;
  return std::clamp(phi.pi0 * d.f0 / d.f, 0.0, 1.0);
}

FdrVector true_fdr(const StatVector& u, const GeneratorParams& phi) {
  phi.validate();
  FdrVector fdr(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) fdr[i] = true_fdr_at(u[i], phi);
  return fdr;
}

}  // namespace fdrsafe
