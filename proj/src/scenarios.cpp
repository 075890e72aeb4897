#include "fdrsafe/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "fdrsafe/core.hpp"
#include "fdrsafe/dist.hpp"
#include "fdrsafe/rng.hpp"

namespace fdrsafe {

namespace {

struct UniformMixture {
  // Two uniform branches: negative [an, bn] with weight wn, positive
  // [ap, bp] with weight 1 - wn.
  double an, bn, wn, ap, bp;

  double density(double u) const {
    double f1 = 0.0;
    if (u >= an && u <= bn) f1 += wn / (bn - an);
    if (u >= ap && u <= bp) f1 += (1.0 - wn) / (bp - ap);
    return f1;
  }

  double draw(Rng& rng) const {
    if (rng.bernoulli(wn)) return rng.uniform(an, bn);
    return rng.uniform(ap, bp);
  }
};

constexpr UniformMixture kSymmetricAlt{-4.0, -1.33, 0.5, 1.33, 4.0};
constexpr UniformMixture kAsymmetricAlt{-6.0, -2.5, 1.0 / 3.0, 1.5, 4.5};

double mixture_true_fdr(double u, double pi0, const UniformMixture& alt) {
  const double f0 = norm_pdf(u);
  const double f1 = alt.density(u);
  const double f = pi0 * f0 + (1.0 - pi0) * f1;
  if (!(f > 0.0)) return 1.0;
  return std::clamp(pi0 * f0 / f, 0.0, 1.0);
}

ScenarioData gen_uniform_mixture(const ScenarioSpec& spec, std::uint64_t seed,
                                 const UniformMixture& alt) {
  ScenarioData data;
  data.u.resize(spec.I);
  data.l.resize(spec.I);
  data.fdr_true.emplace(spec.I);
  Rng rng(seed);
  for (std::size_t i = 0; i < spec.I; ++i) {
    const bool is_alt = rng.bernoulli(1.0 - spec.pi0);
    data.l[i] = is_alt ? 1 : 0;
    data.u[i] = is_alt ? alt.draw(rng) : rng.normal();
    (*data.fdr_true)[i] = mixture_true_fdr(data.u[i], spec.pi0, alt);
  }
  return data;
}

// Lower Cholesky factor of one covariance block.
Eigen::MatrixXd block_cholesky(const ScenarioSpec& spec, std::size_t size) {
  Eigen::MatrixXd sigma(size, size);
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) {
      if (i == j)
        sigma(i, j) = 1.0;
      else if (spec.cov == CovKind::Equicorrelated)
        sigma(i, j) = spec.rho;
      else
        sigma(i, j) = std::pow(spec.rho, static_cast<double>(i > j ? i - j : j - i));
    }
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("correlated scenario: covariance block is not positive definite");
  return llt.matrixL();
}

}  // namespace

void ScenarioSpec::validate() const {
  if (I < 2) throw std::invalid_argument("scenario: I must be >= 2");
  if (!(pi0 >= 0.0 && pi0 <= 1.0))
    throw std::invalid_argument("scenario: pi0 must be in [0, 1]");
  if (kind == ScenarioKind::Correlated) {
    if (n_a < 2 || n_b < 2)
      throw std::invalid_argument("correlated scenario: group sizes must be >= 2");
    if (block_size < 1) throw std::invalid_argument("correlated scenario: block_size must be >= 1");
    if (!(std::fabs(rho) < 1.0))
      throw std::invalid_argument("correlated scenario: |rho| must be < 1");
    if (!(offset_sd > 0.0))
      throw std::invalid_argument("correlated scenario: offset_sd must be positive");
    if (!(neg_prob >= 0.0 && neg_prob <= 1.0))
      throw std::invalid_argument("correlated scenario: neg_prob must be in [0, 1]");
  }
}

double symmetric_true_fdr_at(double u, double pi0) {
  return mixture_true_fdr(u, pi0, kSymmetricAlt);
}

double asymmetric_true_fdr_at(double u, double pi0) {
  return mixture_true_fdr(u, pi0, kAsymmetricAlt);
}

ScenarioData gen_symmetric(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  return gen_uniform_mixture(spec, seed, kSymmetricAlt);
}

ScenarioData gen_asymmetric(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  return gen_uniform_mixture(spec, seed, kAsymmetricAlt);
}

StatVector welch_t_statistics(const std::vector<std::vector<double>>& xa,
                              const std::vector<std::vector<double>>& xb) {
  require_same_length(xa.size(), xb.size(), "welch_t_statistics");
  StatVector u(xa.size());
  for (std::size_t i = 0; i < xa.size(); ++i) {
    const auto& a = xa[i];
    const auto& b = xb[i];
    if (a.size() < 2 || b.size() < 2)
      throw std::invalid_argument("welch_t_statistics: need >= 2 samples per group");
    auto mean_var = [](const std::vector<double>& x) {
      double mean = 0.0;
      for (const double v : x) mean += v;
      mean /= static_cast<double>(x.size());
      double ss = 0.0;
      for (const double v : x) ss += (v - mean) * (v - mean);
      return std::pair<double, double>(mean, ss / static_cast<double>(x.size() - 1));
    };
    const auto [ma, va] = mean_var(a);
    const auto [mb, vb] = mean_var(b);
    const double se2 = va / static_cast<double>(a.size()) + vb / static_cast<double>(b.size());
    u[i] = (mb - ma) / std::sqrt(se2);
  }
  return u;
}

ScenarioData gen_correlated(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  ScenarioData data;
  data.l.resize(spec.I);
  Rng rng(seed);

  // Labels and group-B mean offsets.
  std::vector<double> offset(spec.I, 0.0);
  for (std::size_t i = 0; i < spec.I; ++i) {
    data.l[i] = rng.bernoulli(1.0 - spec.pi0) ? 1 : 0;
    if (data.l[i]) {
      const double magnitude = rng.normal(spec.offset_mean, spec.offset_sd);
      const double direction = rng.bernoulli(spec.neg_prob) ? -1.0 : 1.0;
      offset[i] = direction * magnitude;
    }
  }

  // Per-block correlated Normal draws for both groups; group A mean 0.
  std::vector<std::vector<double>> xa(spec.I), xb(spec.I);
  for (std::size_t i = 0; i < spec.I; ++i) {
    xa[i].resize(spec.n_a);
    xb[i].resize(spec.n_b);
  }
  std::vector<double> z;
  for (std::size_t start = 0; start < spec.I; start += spec.block_size) {
    const std::size_t size = std::min(spec.block_size, spec.I - start);
    const Eigen::MatrixXd L = block_cholesky(spec, size);
    z.resize(size);
    auto draw_block = [&](std::vector<std::vector<double>>& x, std::size_t sample,
                          bool with_offset) {
      for (std::size_t k = 0; k < size; ++k) z[k] = rng.normal();
      for (std::size_t r = 0; r < size; ++r) {
        double v = 0.0;
        for (std::size_t c = 0; c <= r; ++c) v += L(r, c) * z[c];
        x[start + r][sample] = v + (with_offset ? offset[start + r] : 0.0);
      }
    };
    for (std::size_t s = 0; s < spec.n_a; ++s) draw_block(xa, s, false);
    for (std::size_t s = 0; s < spec.n_b; ++s) draw_block(xb, s, true);
  }
  data.u = welch_t_statistics(xa, xb);
  return data;
}

ScenarioData generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case ScenarioKind::Symmetric: return gen_symmetric(spec, seed);
    case ScenarioKind::Asymmetric: return gen_asymmetric(spec, seed);
    case ScenarioKind::Correlated: return gen_correlated(spec, seed);
  }
  throw std::invalid_argument("unknown scenario kind");
}

OraclePair oracle_methods(const StatVector& u, const FdrVector& fdr_true,
                          const std::vector<ModelSpec>& grid, int m, const NullSpec& null_spec,
                          int n_workers) {
  require_same_length(u.size(), fdr_true.size(), "oracle_methods");
  if (grid.empty()) throw std::invalid_argument("oracle_methods: empty grid");

  std::vector<FitResult> fits(grid.size());
  parallel_for(grid.size(), n_workers,
               [&](std::size_t i) { fits[i] = fit_model(grid[i], u, null_spec); });

  // True losses play the role of objective estimates.
  std::vector<ObjectiveEstimate> objectives;
  std::vector<FitResult> fitted;
  OraclePair oracle;
  for (const FitResult& r : fits) {
    if (!r.ok()) continue;
    ObjectiveEstimate est;
    est.model_id = r.fit.model_id;
    est.per_dataset_losses = {mse_loss(r.fit.fdr_hat, fdr_true)};
    est.L_hat = est.per_dataset_losses[0];
    objectives.push_back(est);
    fitted.push_back(r);
    oracle.fitted_ids.push_back(r.fit.model_id);
    oracle.true_losses.push_back(est.L_hat);
  }
  if (fitted.empty()) throw PipelineError("oracle", "every model failed on the observed data");

  auto pick = [&](int take) {
    const std::vector<std::string> ids = select_top(objectives, take);
    std::vector<FitResult> chosen;
    for (const std::string& id : ids) {
      const auto it = std::find_if(fitted.begin(), fitted.end(), [&](const FitResult& r) {
        return r.fit.model_id == id;
      });
      chosen.push_back(*it);
    }
    return ensemble(u, chosen, objectives);
  };
  oracle.single = pick(1);
  oracle.ensemble = pick(m);
  return oracle;
}

}  // namespace fdrsafe
