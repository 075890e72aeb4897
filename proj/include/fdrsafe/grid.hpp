#pragma once

#include <string>
#include <variant>
#include <vector>

#include "fdrsafe/types.hpp"

namespace fdrsafe {

enum class Family { EmpiricalNull, Grenander, PValue };

const char* family_name(Family f);

// Family "enull": Normal weighted null fitted to the central statistics,
// marginal by Poisson regression on binned counts.
enum class NullFitMethod { Mle, CentralMatching };
enum class MarginalBasisKind { Spline, Polynomial };
struct EmpiricalNullParams {
  NullFitMethod nulltype = NullFitMethod::Mle;
  MarginalBasisKind marginal = MarginalBasisKind::Spline;
  double pct0 = 0.225;  // central quantile interval [pct0, 1-pct0] for the null
  double pct = 0.0;     // outlier fraction excluded when fitting the marginal
};

// Family "gren": Normal null scale from central statistics, marginal on the
// p-value scale by the Grenander decreasing-density estimator.
enum class CutoffMethod { Fndr, Pct0 };
struct GrenanderParams {
  CutoffMethod cutoff_method = CutoffMethod::Fndr;
  double pct0 = 0.75;  // central |u| fraction used when cutoff_method = pct0
};

// Family "pval": works on p-values; pi0 from the lambda-threshold curve,
// marginal by Gaussian KDE on a probit/logit scale.
enum class Pi0Method { Smoother, Bootstrap };
enum class PTransform { Probit, Logit };
struct PValueParams {
  Pi0Method pi0_method = Pi0Method::Smoother;
  PTransform transf = PTransform::Probit;
  double adj = 1.5;  // bandwidth multiplier on Silverman's rule
  bool smooth_log_pi0 = false;
};

struct ModelSpec {
  std::string model_id;
  std::variant<EmpiricalNullParams, GrenanderParams, PValueParams> params;

  Family family() const { return static_cast<Family>(params.index()); }
};

std::string make_model_id(const EmpiricalNullParams& p);
std::string make_model_id(const GrenanderParams& p);
std::string make_model_id(const PValueParams& p);

struct EmpiricalNullGrid {
  bool include = true;
  std::vector<NullFitMethod> nulltypes{NullFitMethod::Mle, NullFitMethod::CentralMatching};
  std::vector<MarginalBasisKind> marginals{MarginalBasisKind::Spline, MarginalBasisKind::Polynomial};
  std::vector<double> pct0{0.0, 0.075, 0.15, 0.225, 0.3};
  std::vector<double> pct{0.0, 0.1, 0.2, 0.3};
};

struct GrenanderGrid {
  bool include = true;
  std::vector<CutoffMethod> cutoff_methods{CutoffMethod::Fndr, CutoffMethod::Pct0};
  std::vector<double> pct0{0.4, 0.55, 0.7, 0.85, 1.0};  // only under cutoff_method = pct0
};

struct PValueGrid {
  bool include = true;
  std::vector<Pi0Method> pi0_methods{Pi0Method::Smoother, Pi0Method::Bootstrap};
  std::vector<PTransform> transfs{PTransform::Probit, PTransform::Logit};
  std::vector<double> adj{0.5, 1.0, 1.5, 2.0};
  std::vector<bool> smooth_log_pi0{false, true};  // only under pi0_method = smoother
};

struct GridConfig {
  EmpiricalNullGrid empirical_null;
  GrenanderGrid grenander;
  PValueGrid pvalue;

  void validate() const;
};

// Cartesian product per family with duplicate parameter values removed,
// ordered by model_id. Throws std::invalid_argument on an empty grid.
std::vector<ModelSpec> build_grid(const GridConfig& cfg = {});

// Default specs mirroring each family's conventional settings.
ModelSpec default_empirical_null_spec();
ModelSpec default_grenander_spec();
ModelSpec default_pvalue_spec();

struct FitResult {
  FdrFit fit;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

// Fits one grid model; every numerical failure comes back as a FitResult
// error carrying the model id, never an exception.
FitResult fit_model(const ModelSpec& spec, const StatVector& u, const NullSpec& null_spec);

// Family fits. These throw FitError; fit_model converts to FitResult.
FdrFit fit_empirical_null(const StatVector& u, const EmpiricalNullParams& params);
FdrFit fit_grenander(const StatVector& u, const GrenanderParams& params);
FdrFit fit_pvalue_family(const std::vector<double>& p, const PValueParams& params);

// pi0(lambda) = #{p > lambda} / (I * (1 - lambda)) over the lambda grid.
std::vector<double> pi0_lambda_grid();
std::vector<double> pi0_lambda_curve(const std::vector<double>& p,
                                     const std::vector<double>& lambdas);
// Final pi0 estimate, capped to [0, 1]: spline-smoothed curve evaluated at
// the largest lambda, or the bootstrap-MSE-minimizing lambda.
double estimate_pi0_lambda(const std::vector<double>& p, Pi0Method method,
                           bool smooth_log_pi0);

}  // namespace fdrsafe
