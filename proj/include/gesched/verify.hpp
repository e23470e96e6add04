#pragma once

#include <cstdint>

#include "gesched/model.hpp"
#include "gesched/report.hpp"
#include "gesched/solver.hpp"

// Numerical certificates for the structural properties of the solved tables:
// evenness and fold equivalence, monotonicity and concavity of the value
// function, the mixing inequality, threshold structure, and the two integral
// lemmas used in the structure proof. Each check reports its worst violation
// even when it passes.

namespace gesched {

struct VerifyTolerances {
  double evenness = 1e-6;
  double fold_equivalence = 1e-6;
  double monotone = 1e-6;
  double concavity_relative = 1e-8;
  // Interpolated z under-estimates a concave V, which only helps this
  // inequality, so the looser bound only absorbs rounding in the mixing.
  double inequality_c = 1e-5;
  double lemma = 1e-6;
};

/// max |T(e,b) - T(-e,b)| over V, Q0 and Q1 of an original-grid solve.
CheckResult verify_evenness(const ValueTable& v_original, const QTable& q_original,
                            double tol = 1e-6);
CheckResult verify_evenness(const ValueTable& v_original, double tol = 1e-6);

/// Compares an original-grid solve with a folded solve on e >= 0: values and
/// both Q tables within tol, policies identical.
CheckResult verify_fold_equivalence(const SolveResult& original,
                                    const SolveResult& folded, double tol = 1e-6);

/// V(., b) non-decreasing in e.
CheckResult verify_monotone_error(const ValueTable& v, double tol = 1e-6);
/// V(e, .) non-increasing in b.
CheckResult verify_monotone_belief(const ValueTable& v, double tol = 1e-6);
/// Concavity of every row in b, measured as chord minus midpoint value
/// relative to max(1, |V|), on the possibly nonuniform belief grid.
CheckResult verify_concave_belief(const ValueTable& v, double relative_tol = 1e-8);

struct InequalityCSamples {
  bool grid_triples = true;
  int random_triples = 10000;
  std::uint64_t seed = 20240521;
};

/// (1-b) lambda + b V(e,x) + (1-b) V(e,y) >= V(e, b x + (1-b) y) for x >= y.
CheckResult verify_inequality_c(const ValueTable& v, double lambda,
                                const InequalityCSamples& samples = {},
                                double tol = 1e-5);

/// Every row's transmit set is a suffix of the belief grid.
CheckResult verify_threshold(const QTable& q);
CheckResult verify_threshold(const PolicyTable& policy);

/// E[V(e+, T(b)) | e'] >= E[V(e+, T(b)) | e] for e' >= e, every belief column.
CheckResult verify_lemma_a1(const ValueTable& v, const BellmanOperator& op,
                            double tol = 1e-6);
/// E[V(e+, p11) | 0] - E[V(e+, p01) | e] <= 0 for every e.
CheckResult verify_lemma_a2(const ValueTable& v, const BellmanOperator& op,
                            double tol = 1e-6);
/// Same with one belief b in both terms, for every grid b.
CheckResult verify_remark_a3(const ValueTable& v, const BellmanOperator& op,
                             double tol = 1e-6);

/// Solves the folded and original problems and runs every check.
VerificationReport run_all(const ValidatedParams& params, const SolverConfig& config,
                           const VerifyTolerances& tol = {});

/// Runs every check on a deliberately corrupted input. A returned entry
/// passes when the underlying check correctly FAILED; `violation` is the
/// violation the check reported.
VerificationReport fault_injection_selftest(const ValidatedParams& params,
                                            const SolverConfig& config,
                                            const VerifyTolerances& tol = {});

}  // namespace gesched
