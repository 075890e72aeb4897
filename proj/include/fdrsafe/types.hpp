#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdrsafe {

// Test statistics, binary hypothesis labels (1 = not-null), and per-hypothesis
// fdr values. Index i is the hypothesis identity; no operation reorders these
// relative to one another.
using StatVector = std::vector<double>;
using LabelVector = std::vector<int>;
using FdrVector = std::vector<double>;

enum class NullKind { StandardNormal, TDistribution };

struct NullSpec {
  NullKind kind = NullKind::StandardNormal;
  double df = 0.0;  // used iff kind == TDistribution

  static NullSpec standard_normal() { return {NullKind::StandardNormal, 0.0}; }
  static NullSpec t(double df) { return {NullKind::TDistribution, df}; }

  void validate() const {
    if (kind == NullKind::TDistribution && !(df > 0.0))
      throw std::invalid_argument("NullSpec: t null requires df > 0");
  }
};

// Output of a single fdr model: local fdr per hypothesis, the estimated
// proportion null, and the tail-end Fdr derived from fdr_hat.
struct FdrFit {
  std::string model_id;
  FdrVector fdr_hat;
  double pi0_hat = 1.0;
  FdrVector Fdr_hat;
};

// Soft failure of a single model fit. Grid runs convert this to an
// excluded-model record instead of aborting.
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& reason) : std::runtime_error(reason) {}
};

// Hard failure of a pipeline stage (generator fit, scoring, ensembling).
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace fdrsafe
