#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conewalk/linalg.hpp"
#include "conewalk/model.hpp"

namespace conewalk {

enum class ConditionId {
  wishart_drift,
  gcir_pointwise,
  gcir_a,
  gcir_b,
  gcir_c,
  gcir_d,
  gcir_e,
  gcir_f,
  gcir_g,
  theorem_floor,
};

enum class Verdict { pass, fail, indeterminate };

std::string to_string(ConditionId id);
std::string to_string(Verdict v);
ConditionId condition_from_string(const std::string& s);

/// Sufficient sets (a)-(g) for the GCIR family.
enum class GcirVariant { a, b, c, d, e, f, g };

ConditionId to_condition(GcirVariant v);
GcirVariant variant_from_condition(ConditionId id);

struct Witness {
  std::optional<MatrixXd> x;         // offending state, when the check is state-dependent
  double value = 0.0;                // margin or smallest eigenvalue of LHS - RHS
  std::optional<double> eigenvalue;  // offending eigenvalue of a matrix inequality
};

struct ConditionReport {
  ConditionId condition_id = ConditionId::wishart_drift;
  Verdict verdict = Verdict::indeterminate;
  bool exact = false;
  std::size_t samples_used = 0;
  std::uint64_t seed = 0;
  std::string sampling_law;
  std::optional<Witness> witness;
  double floor_estimate = 0.0;  // theorem_floor only
  double lambda_qtq = 0.0;      // largest eigenvalue of Q^T Q
};

/// How positive definite states are drawn for "for all x" conditions:
/// x = G G^T + eps I with G standard Gaussian and eps cycling through
/// `eps_levels`, plus near-boundary diag(eps, 1, ..., 1) and large s I.
struct SamplePlan {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::vector<double> eps_levels{1e-6, 1e-3, 1.0};
  std::vector<double> large_scales{1e3, 1e6};
  bool include_extremes = true;

  std::string describe() const;
};

std::vector<SymMatrixd> sample_states(Index dim, const SamplePlan& plan);

/// Parameters of the GCIR drift condition.
struct GcirParams {
  double alpha = 0.5;
  SymMatrixd b;
  MatrixXd q;
  GammaSpec gamma;

  Index dim() const { return b.dim(); }
  static GcirParams from_model(const ModelSpec& m);
};

/// b >= (d+1) Q^T Q, decided exactly from the smallest eigenvalue.
ConditionReport check_wishart_drift(const SymMatrixd& b, const MatrixXd& q, Index d);

/// Pointwise trace inequality
///   Tr(Gamma(x) x^-1 + b x^-1) >= Tr(x^{2a-1}) Tr(Q^T Q x^-1) + Tr(x^{2a-2} Q^T Q)
/// with a relative band of 1e-10 on both sides.
bool check_gcir_pointwise(const GcirParams& p, const SymMatrixd& x);
/// LHS - RHS of the pointwise inequality (no tolerance).
double gcir_pointwise_gap(const GcirParams& p, const SymMatrixd& x);

/// Smallest eigenvalue of (LHS - RHS) of the variant's matrix inequality at
/// x, or for (d)-(f) the smaller of that and lambda_min(b). For (g) returns
/// b (the sign requirement) when alpha > 1/2 and d = 1.
double gcir_variant_gap(GcirVariant v, const GcirParams& p, const SymMatrixd& x);
bool gcir_variant_holds(GcirVariant v, const GcirParams& p, const SymMatrixd& x);

/// Checks one sufficient set. Exact when Gamma allows a closed-form
/// reduction, otherwise sampled with `plan`.
ConditionReport check_gcir_sufficient(GcirVariant v, const GcirParams& p, const SamplePlan& plan);

/// max over lambda in [0,1] of lambda^{2a-1} - lambda (0^0 := 1), by a
/// 1e5-point grid refined with golden-section search.
double max_gap(double alpha);

/// Is drift_margin >= claimed_c everywhere? Exact when a certificate is
/// available for the family, otherwise sampled over states (and over one
/// period of the modulation for the general family).
ConditionReport check_theorem_floor(const ModelSpec& model, const SamplePlan& plan, double claimed_c);

}  // namespace conewalk
