#include <algorithm>
#include <cmath>

#include "fdrsafe/core.hpp"
#include "fdrsafe/rng.hpp"
#include "fdrsafe/scenarios.hpp"

namespace fdrsafe {

namespace {

constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kSafeStream = 1;

FdrFit as_fit(const EnsembleResult& result, const std::string& name) {
  FdrFit fit;
  fit.model_id = name;
  fit.fdr_hat = result.fdr_hat;
  fit.pi0_hat = result.pi0_hat;
  fit.Fdr_hat = result.Fdr_hat;
  return fit;
}

std::string family_of_model_id(const std::string& id) {
  const auto colon = id.find(':');
  const std::string prefix = id.substr(0, colon);
  if (prefix == "enull") return family_name(Family::EmpiricalNull);
  if (prefix == "gren") return family_name(Family::Grenander);
  if (prefix == "pval") return family_name(Family::PValue);
  return prefix;
}

}  // namespace

const std::vector<std::string>& study_method_names() {
  static const std::vector<std::string> names{
      "fdrsafe",        "selection_only",          "aggregation_only",
      "aggregation_all", "baseline_empirical_null", "baseline_grenander",
      "baseline_pvalue", "oracle_single",           "oracle_ensemble"};
  return names;
}

std::map<std::string, std::map<std::string, double>> StudyResult::medians() const {
  std::map<std::string, std::map<std::string, std::vector<double>>> grouped;
  for (const StudyRow& row : rows) grouped[row.method][row.metric].push_back(row.value);
  std::map<std::string, std::map<std::string, double>> out;
  for (auto& [method, metrics] : grouped)
    for (auto& [metric, values] : metrics) {
      std::sort(values.begin(), values.end());
      const std::size_t n = values.size();
      out[method][metric] =
          n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    }
  return out;
}

StudyResult run_study(const StudyConfig& cfg, std::uint64_t master_seed) {
  cfg.scenario.validate();
  if (cfg.reps < 1) throw std::invalid_argument("run_study: reps must be >= 1");

  std::vector<std::string> methods = cfg.methods.empty() ? study_method_names() : cfg.methods;
  for (const std::string& m : methods) {
    const auto& known = study_method_names();
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw std::invalid_argument("run_study: unknown method " + m);
  }
  auto wants = [&](const std::string& name) {
    return std::find(methods.begin(), methods.end(), name) != methods.end();
  };

  // The p-value family sees the scenario's null: the true standard Normal
  // for the uniform-mixture scenarios, t with n_a + n_b - 2 df for the
  // correlated one (kept even though correlation violates it).
  SafeConfig safe = cfg.safe;
  safe.null_spec = cfg.scenario.kind == ScenarioKind::Correlated
                       ? NullSpec::t(static_cast<double>(cfg.scenario.n_a + cfg.scenario.n_b - 2))
                       : NullSpec::standard_normal();
  safe.validate();

  StudyResult result;
  result.methods = methods;
  result.reps = cfg.reps;
  std::map<std::string, std::size_t> family_counts;

  const bool want_scored = wants("fdrsafe") || wants("selection_only");
  const bool want_oracles = wants("oracle_single") || wants("oracle_ensemble");

  for (int rep = 0; rep < cfg.reps; ++rep) {
    const std::uint64_t rep_seed = derive_seed(master_seed, static_cast<std::uint64_t>(rep));
    const ScenarioData data = generate_scenario(cfg.scenario, derive_seed(rep_seed, kDataStream));

    SafeConfig rep_cfg = safe;
    rep_cfg.seed = derive_seed(rep_seed, kSafeStream);

    auto record = [&](const std::string& method, const FdrFit& fit) {
      const EvalReport report = evaluate(fit, data.u, data.l, data.fdr_true);
      auto push = [&](const char* metric, double value) {
        result.rows.push_back({method, rep, metric, value});
      };
      if (report.fdr_rmse) push("fdr_rmse", *report.fdr_rmse);
      push("Fdr_rmse", report.Fdr_rmse);
      push("brier", report.brier);
      if (report.pr_auc) push("pr_auc", *report.pr_auc);
      if (report.roc_auc) push("roc_auc", *report.roc_auc);
      push("pi0_hat", report.pi0_hat);
    };

    if (want_scored) {
      try {
        const ScoredPipeline scored = score_grid(data.u, rep_cfg);
        if (wants("fdrsafe")) {
          const EnsembleResult r =
              ensemble_from_scores(data.u, rep_cfg, scored, rep_cfg.ensemble_size);
          record("fdrsafe", as_fit(r, "fdrsafe"));
          for (const SelectedModel& sel : r.selected)
            family_counts[family_of_model_id(sel.model_id)] += 1;
        }
        if (wants("selection_only")) {
          const EnsembleResult r = ensemble_from_scores(data.u, rep_cfg, scored, 1);
          record("selection_only", as_fit(r, "selection_only"));
        }
      } catch (const std::exception&) {
        // failed repetition for these methods: rows stay missing
      }
    }

    for (const AblationVariant variant :
         {AblationVariant::AggregationOnly, AblationVariant::AggregationAll}) {
      const std::string name = variant == AblationVariant::AggregationOnly
                                   ? "aggregation_only"
                                   : "aggregation_all";
      if (!wants(name)) continue;
      try {
        const EnsembleResult r = run_ablation(data.u, rep_cfg, variant);
        record(name, as_fit(r, name));
      } catch (const std::exception&) {
      }
    }

    const std::pair<std::string, ModelSpec> baselines[] = {
        {"baseline_empirical_null", default_empirical_null_spec()},
        {"baseline_grenander", default_grenander_spec()},
        {"baseline_pvalue", default_pvalue_spec()},
    };
    for (const auto& [name, spec] : baselines) {
      if (!wants(name)) continue;
      const FitResult r = fit_model(spec, data.u, rep_cfg.null_spec);
      if (r.ok()) record(name, r.fit);
    }

    if (want_oracles && data.fdr_true) {
      try {
        const OraclePair oracle =
            oracle_methods(data.u, *data.fdr_true, build_grid(rep_cfg.grid),
                           rep_cfg.ensemble_size, rep_cfg.null_spec, rep_cfg.n_workers);
        if (wants("oracle_single")) record("oracle_single", as_fit(oracle.single, "oracle_single"));
        if (wants("oracle_ensemble"))
          record("oracle_ensemble", as_fit(oracle.ensemble, "oracle_ensemble"));
      } catch (const std::exception&) {
      }
    }
  }

  std::size_t total = 0;
  for (const auto& [family, count] : family_counts) total += count;
  if (total > 0)
    for (const auto& [family, count] : family_counts)
      result.family_share[family] = static_cast<double>(count) / static_cast<double>(total);
  return result;
}

}  // namespace fdrsafe
