#include "fdrsafe/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "fdrsafe/core.hpp"

namespace fdrsafe {

const char* family_name(Family f) {
  switch (f) {
    case Family::EmpiricalNull: return "empirical_null";
    case Family::Grenander: return "grenander";
    case Family::PValue: return "pvalue";
  }
  return "?";
}

namespace {

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

const char* nulltype_token(NullFitMethod m) {
  return m == NullFitMethod::Mle ? "mle" : "central-matching";
}
const char* marginal_token(MarginalBasisKind m) {
  return m == MarginalBasisKind::Spline ? "spline" : "polynomial";
}
const char* cutoff_token(CutoffMethod m) { return m == CutoffMethod::Fndr ? "fndr" : "pct0"; }
const char* pi0_token(Pi0Method m) { return m == Pi0Method::Smoother ? "smoother" : "bootstrap"; }
const char* transf_token(PTransform t) { return t == PTransform::Probit ? "probit" : "logit"; }

template <typename T>
std::vector<T> dedup(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::string make_model_id(const EmpiricalNullParams& p) {
  return std::string("enull:") + nulltype_token(p.nulltype) + ":" + marginal_token(p.marginal) +
         ":pct0=" + fmt_num(p.pct0) + ":pct=" + fmt_num(p.pct);
}

std::string make_model_id(const GrenanderParams& p) {
  std::string id = std::string("gren:cutoff=") + cutoff_token(p.cutoff_method);
  if (p.cutoff_method == CutoffMethod::Pct0) id += ":pct0=" + fmt_num(p.pct0);
  return id;
}

std::string make_model_id(const PValueParams& p) {
  std::string id = std::string("pval:") + pi0_token(p.pi0_method) + ":" + transf_token(p.transf) +
                   ":adj=" + fmt_num(p.adj);
  if (p.pi0_method == Pi0Method::Smoother)
    id += std::string(":logpi0=") + (p.smooth_log_pi0 ? "1" : "0");
  return id;
}

void GridConfig::validate() const {
  if (!empirical_null.include && !grenander.include && !pvalue.include)
    throw std::invalid_argument("grid config: no family enabled");
  if (empirical_null.include) {
    for (double v : empirical_null.pct0)
      if (!(v >= 0.0 && v < 0.5))
        throw std::invalid_argument("grid config: empirical_null pct0 must be in [0, 0.5)");
    for (double v : empirical_null.pct)
      if (!(v >= 0.0 && v < 1.0))
        throw std::invalid_argument("grid config: empirical_null pct must be in [0, 1)");
    if (empirical_null.nulltypes.empty() || empirical_null.marginals.empty() ||
        empirical_null.pct0.empty() || empirical_null.pct.empty())
      throw std::invalid_argument("grid config: empirical_null has an empty parameter list");
  }
  if (grenander.include) {
    if (grenander.cutoff_methods.empty())
      throw std::invalid_argument("grid config: grenander has no cutoff methods");
    const bool needs_pct0 =
        std::find(grenander.cutoff_methods.begin(), grenander.cutoff_methods.end(),
                  CutoffMethod::Pct0) != grenander.cutoff_methods.end();
    if (needs_pct0 && grenander.pct0.empty())
      throw std::invalid_argument("grid config: grenander pct0 list is empty");
    for (double v : grenander.pct0)
      if (!(v > 0.0 && v <= 1.0))
        throw std::invalid_argument("grid config: grenander pct0 must be in (0, 1]");
  }
  if (pvalue.include) {
    if (pvalue.pi0_methods.empty() || pvalue.transfs.empty() || pvalue.adj.empty())
      throw std::invalid_argument("grid config: pvalue has an empty parameter list");
    const bool needs_slp = std::find(pvalue.pi0_methods.begin(), pvalue.pi0_methods.end(),
                                     Pi0Method::Smoother) != pvalue.pi0_methods.end();
    if (needs_slp && pvalue.smooth_log_pi0.empty())
      throw std::invalid_argument("grid config: pvalue smooth_log_pi0 list is empty");
    for (double v : pvalue.adj)
      if (!(v > 0.0))
        throw std::invalid_argument("grid config: pvalue adj must be positive");
  }
}

std::vector<ModelSpec> build_grid(const GridConfig& cfg) {
  cfg.validate();
  std::vector<ModelSpec> grid;

  if (cfg.empirical_null.include) {
    for (NullFitMethod nt : dedup(cfg.empirical_null.nulltypes))
      for (MarginalBasisKind mb : dedup(cfg.empirical_null.marginals))
        for (double q0 : dedup(cfg.empirical_null.pct0))
          for (double q : dedup(cfg.empirical_null.pct)) {
            EmpiricalNullParams p{nt, mb, q0, q};
            grid.push_back({make_model_id(p), p});
          }
  }
  if (cfg.grenander.include) {
    for (CutoffMethod cm : dedup(cfg.grenander.cutoff_methods)) {
      if (cm == CutoffMethod::Fndr) {
        GrenanderParams p{cm, 0.75};
        grid.push_back({make_model_id(p), p});
      } else {
        for (double q0 : dedup(cfg.grenander.pct0)) {
          GrenanderParams p{cm, q0};
          grid.push_back({make_model_id(p), p});
        }
      }
    }
  }
  if (cfg.pvalue.include) {
    for (Pi0Method pm : dedup(cfg.pvalue.pi0_methods))
      for (PTransform tr : dedup(cfg.pvalue.transfs))
        for (double a : dedup(cfg.pvalue.adj)) {
          if (pm == Pi0Method::Smoother) {
            for (bool slp : dedup(cfg.pvalue.smooth_log_pi0)) {
              PValueParams p{pm, tr, a, slp};
              grid.push_back({make_model_id(p), p});
            }
          } else {
            PValueParams p{pm, tr, a, false};
            grid.push_back({make_model_id(p), p});
          }
        }
  }

  std::sort(grid.begin(), grid.end(),
            [](const ModelSpec& a, const ModelSpec& b) { return a.model_id < b.model_id; });
  if (grid.empty()) throw std::invalid_argument("grid config: resulting grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i].model_id == grid[i - 1].model_id)
      throw std::invalid_argument("grid config: duplicate model id " + grid[i].model_id);
  return grid;
}

ModelSpec default_empirical_null_spec() {
  EmpiricalNullParams p{NullFitMethod::Mle, MarginalBasisKind::Spline, 0.225, 0.0};
  return {make_model_id(p), p};
}

ModelSpec default_grenander_spec() {
  GrenanderParams p{CutoffMethod::Fndr, 0.75};
  return {make_model_id(p), p};
}

ModelSpec default_pvalue_spec() {
  PValueParams p{Pi0Method::Smoother, PTransform::Probit, 1.5, false};
  return {make_model_id(p), p};
}

FitResult fit_model(const ModelSpec& spec, const StatVector& u, const NullSpec& null_spec) {
  FitResult result;
  result.fit.model_id = spec.model_id;
  try {
    if (u.size() < 2) throw FitError("insufficient data (need at least 2 statistics)");
    for (const double x : u)
      if (!std::isfinite(x)) throw FitError("non-finite statistic");

    FdrFit fit = std::visit(
        [&](const auto& params) -> FdrFit {
          using P = std::decay_t<decltype(params)>;
          if constexpr (std::is_same_v<P, EmpiricalNullParams>)
            return fit_empirical_null(u, params);
          else if constexpr (std::is_same_v<P, GrenanderParams>)
            return fit_grenander(u, params);
          else
            return fit_pvalue_family(to_pvalues(u, null_spec), params);
        },
        spec.params);

    if (fit.fdr_hat.size() != u.size()) throw FitError("fit produced wrong-length output");
    for (double& v : fit.fdr_hat) {
      if (!std::isfinite(v)) throw FitError("non-finite fdr in fit output");
      v = std::clamp(v, 0.0, 1.0);
    }
    if (!std::isfinite(fit.pi0_hat)) throw FitError("non-finite pi0 in fit output");
    fit.pi0_hat = std::clamp(fit.pi0_hat, 0.0, 1.0);
    fit.model_id = spec.model_id;
    fit.Fdr_hat = fdr_to_Fdr(u, fit.fdr_hat);
    result.fit = std::move(fit);
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

}  // namespace fdrsafe
