#include "fdrsafe/config_json.hpp"

#include <algorithm>

namespace fdrsafe {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("config: " + what); }

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end())
      bad("unknown key '" + key + "' in " + where);
}

template <typename T, typename Parse>
std::vector<T> parse_list(const json& j, const std::string& where, Parse parse) {
  if (!j.is_array() || j.empty()) bad(where + " must be a non-empty array");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(parse(v));
  return out;
}

NullFitMethod parse_nulltype(const json& v) {
  const std::string s = v.get<std::string>();
  if (s == "mle") return NullFitMethod::Mle;
  if (s == "central-matching") return NullFitMethod::CentralMatching;
  bad("nulltype must be 'mle' or 'central-matching', got '" + s + "'");
}

MarginalBasisKind parse_marginal(const json& v) {
  const std::string s = v.get<std::string>();
  if (s == "spline") return MarginalBasisKind::Spline;
  if (s == "polynomial") return MarginalBasisKind::Polynomial;
  bad("marginal must be 'spline' or 'polynomial', got '" + s + "'");
}

CutoffMethod parse_cutoff(const json& v) {
  const std::string s = v.get<std::string>();
  if (s == "fndr") return CutoffMethod::Fndr;
  if (s == "pct0") return CutoffMethod::Pct0;
  bad("cutoff_method must be 'fndr' or 'pct0', got '" + s + "'");
}

Pi0Method parse_pi0_method(const json& v) {
  const std::string s = v.get<std::string>();
  if (s == "smoother") return Pi0Method::Smoother;
  if (s == "bootstrap") return Pi0Method::Bootstrap;
  bad("pi0_method must be 'smoother' or 'bootstrap', got '" + s + "'");
}

PTransform parse_transf(const json& v) {
  const std::string s = v.get<std::string>();
  if (s == "probit") return PTransform::Probit;
  if (s == "logit") return PTransform::Logit;
  bad("transf must be 'probit' or 'logit', got '" + s + "'");
}

double parse_number(const json& v) {
  if (!v.is_number()) bad("expected a number");
  return v.get<double>();
}

bool parse_bool(const json& v) {
  if (!v.is_boolean()) bad("expected a boolean");
  return v.get<bool>();
}

}  // namespace

GridConfig grid_config_from_json(const json& j) {
  GridConfig cfg;
  check_keys(j, {"empirical_null", "grenander", "pvalue"}, "grid config");

  if (j.contains("empirical_null")) {
    const json& f = j["empirical_null"];
    check_keys(f, {"include", "nulltype", "marginal", "pct0", "pct"}, "empirical_null");
    if (f.contains("include")) cfg.empirical_null.include = parse_bool(f["include"]);
    if (f.contains("nulltype"))
      cfg.empirical_null.nulltypes =
          parse_list<NullFitMethod>(f["nulltype"], "empirical_null.nulltype", parse_nulltype);
    if (f.contains("marginal"))
      cfg.empirical_null.marginals =
          parse_list<MarginalBasisKind>(f["marginal"], "empirical_null.marginal", parse_marginal);
    if (f.contains("pct0"))
      cfg.empirical_null.pct0 = parse_list<double>(f["pct0"], "empirical_null.pct0", parse_number);
    if (f.contains("pct"))
      cfg.empirical_null.pct = parse_list<double>(f["pct"], "empirical_null.pct", parse_number);
  }
  if (j.contains("grenander")) {
    const json& f = j["grenander"];
    check_keys(f, {"include", "cutoff_method", "pct0"}, "grenander");
    if (f.contains("include")) cfg.grenander.include = parse_bool(f["include"]);
    if (f.contains("cutoff_method"))
      cfg.grenander.cutoff_methods =
          parse_list<CutoffMethod>(f["cutoff_method"], "grenander.cutoff_method", parse_cutoff);
    if (f.contains("pct0"))
      cfg.grenander.pct0 = parse_list<double>(f["pct0"], "grenander.pct0", parse_number);
  }
  if (j.contains("pvalue")) {
    const json& f = j["pvalue"];
    check_keys(f, {"include", "pi0_method", "transf", "adj", "smooth_log_pi0"}, "pvalue");
    if (f.contains("include")) cfg.pvalue.include = parse_bool(f["include"]);
    if (f.contains("pi0_method"))
      cfg.pvalue.pi0_methods =
          parse_list<Pi0Method>(f["pi0_method"], "pvalue.pi0_method", parse_pi0_method);
    if (f.contains("transf"))
      cfg.pvalue.transfs = parse_list<PTransform>(f["transf"], "pvalue.transf", parse_transf);
    if (f.contains("adj")) cfg.pvalue.adj = parse_list<double>(f["adj"], "pvalue.adj", parse_number);
    if (f.contains("smooth_log_pi0"))
      cfg.pvalue.smooth_log_pi0 =
          parse_list<bool>(f["smooth_log_pi0"], "pvalue.smooth_log_pi0", parse_bool);
  }
  cfg.validate();
  return cfg;
}

nlohmann::json grid_config_to_json(const GridConfig& cfg) {
  json j;
  auto nulltypes = json::array();
  for (const auto v : cfg.empirical_null.nulltypes)
    nulltypes.push_back(v == NullFitMethod::Mle ? "mle" : "central-matching");
  auto marginals = json::array();
  for (const auto v : cfg.empirical_null.marginals)
    marginals.push_back(v == MarginalBasisKind::Spline ? "spline" : "polynomial");
  j["empirical_null"] = {{"include", cfg.empirical_null.include},
                         {"nulltype", nulltypes},
                         {"marginal", marginals},
                         {"pct0", cfg.empirical_null.pct0},
                         {"pct", cfg.empirical_null.pct}};
  auto cutoffs = json::array();
  for (const auto v : cfg.grenander.cutoff_methods)
    cutoffs.push_back(v == CutoffMethod::Fndr ? "fndr" : "pct0");
  j["grenander"] = {{"include", cfg.grenander.include},
                    {"cutoff_method", cutoffs},
                    {"pct0", cfg.grenander.pct0}};
  auto pi0_methods = json::array();
  for (const auto v : cfg.pvalue.pi0_methods)
    pi0_methods.push_back(v == Pi0Method::Smoother ? "smoother" : "bootstrap");
  auto transfs = json::array();
  for (const auto v : cfg.pvalue.transfs)
    transfs.push_back(v == PTransform::Probit ? "probit" : "logit");
  j["pvalue"] = {{"include", cfg.pvalue.include},
                 {"pi0_method", pi0_methods},
                 {"transf", transfs},
                 {"adj", cfg.pvalue.adj},
                 {"smooth_log_pi0", cfg.pvalue.smooth_log_pi0}};
  return j;
}

ScenarioSpec scenario_from_json(const json& j) {
  ScenarioSpec spec;
  check_keys(j,
             {"kind", "I", "pi0", "covariance", "n_a", "n_b", "offset_mean", "offset_sd",
              "neg_prob"},
             "scenario config");
  if (!j.contains("kind")) bad("scenario config needs a 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "symmetric")
    spec.kind = ScenarioKind::Symmetric;
  else if (kind == "asymmetric")
    spec.kind = ScenarioKind::Asymmetric;
  else if (kind == "correlated")
    spec.kind = ScenarioKind::Correlated;
  else
    bad("unknown scenario kind '" + kind + "'");
  if (j.contains("I")) spec.I = j["I"].get<std::size_t>();
  if (j.contains("pi0")) spec.pi0 = parse_number(j["pi0"]);
  if (j.contains("covariance")) {
    const json& c = j["covariance"];
    check_keys(c, {"kind", "rho", "block_size"}, "covariance");
    if (c.contains("kind")) {
      const std::string ck = c["kind"].get<std::string>();
      if (ck == "equicorrelated")
        spec.cov = CovKind::Equicorrelated;
      else if (ck == "ar1")
        spec.cov = CovKind::Ar1;
      else
        bad("covariance kind must be 'equicorrelated' or 'ar1', got '" + ck + "'");
    }
    if (c.contains("rho")) spec.rho = parse_number(c["rho"]);
    if (c.contains("block_size")) spec.block_size = c["block_size"].get<std::size_t>();
  }
  if (j.contains("n_a")) spec.n_a = j["n_a"].get<std::size_t>();
  if (j.contains("n_b")) spec.n_b = j["n_b"].get<std::size_t>();
  if (j.contains("offset_mean")) spec.offset_mean = parse_number(j["offset_mean"]);
  if (j.contains("offset_sd")) spec.offset_sd = parse_number(j["offset_sd"]);
  if (j.contains("neg_prob")) spec.neg_prob = parse_number(j["neg_prob"]);
  spec.validate();
  return spec;
}

nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
  json j;
  j["kind"] = spec.kind == ScenarioKind::Symmetric
                  ? "symmetric"
                  : (spec.kind == ScenarioKind::Asymmetric ? "asymmetric" : "correlated");
  j["I"] = spec.I;
  j["pi0"] = spec.pi0;
  if (spec.kind == ScenarioKind::Correlated) {
    j["covariance"] = {{"kind", spec.cov == CovKind::Equicorrelated ? "equicorrelated" : "ar1"},
                       {"rho", spec.rho},
                       {"block_size", spec.block_size}};
    j["n_a"] = spec.n_a;
    j["n_b"] = spec.n_b;
    j["offset_mean"] = spec.offset_mean;
    j["offset_sd"] = spec.offset_sd;
    j["neg_prob"] = spec.neg_prob;
  }
  return j;
}

nlohmann::json model_params_to_json(const ModelSpec& spec) {
  json j;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, EmpiricalNullParams>) {
          j["nulltype"] = p.nulltype == NullFitMethod::Mle ? "mle" : "central-matching";
          j["marginal"] = p.marginal == MarginalBasisKind::Spline ? "spline" : "polynomial";
          j["pct0"] = p.pct0;
          j["pct"] = p.pct;
        } else if constexpr (std::is_same_v<P, GrenanderParams>) {
          j["cutoff_method"] = p.cutoff_method == CutoffMethod::Fndr ? "fndr" : "pct0";
          if (p.cutoff_method == CutoffMethod::Pct0) j["pct0"] = p.pct0;
        } else {
          j["pi0_method"] = p.pi0_method == Pi0Method::Smoother ? "smoother" : "bootstrap";
          j["transf"] = p.transf == PTransform::Probit ? "probit" : "logit";
          j["adj"] = p.adj;
          if (p.pi0_method == Pi0Method::Smoother) j["smooth_log_pi0"] = p.smooth_log_pi0;
        }
      },
      spec.params);
  return j;
}

}  // namespace fdrsafe
