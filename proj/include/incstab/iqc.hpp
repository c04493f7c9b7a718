#pragma once

#include <string>
#include <utility>
#include <vector>

#include "incstab/certify.hpp"
#include "incstab/lti.hpp"
#include "incstab/operator.hpp"
#include "incstab/signal.hpp"

namespace incstab {

enum class MultiplierKind { kConstant, kSmallGain, kPassivity, kTable };

/// Frequency-dependent Hermitian form Pi(jw) acting on stacked (y, w) with
/// block sizes ny (H1 output) and nw (H1 input).
struct Multiplier {
  MultiplierKind kind = MultiplierKind::kSmallGain;
  Index ny = 1;
  Index nw = 1;
  Scalar gamma = 1;
  ComplexMatrix constant;
  /// Sorted by strictly increasing frequency.
  std::vector<std::pair<Scalar, ComplexMatrix>> table;

  Index size() const { return ny + nw; }
};

Multiplier SmallGainMultiplier(Scalar gamma, Index ny = 1, Index nw = 1);
/// Requires ny == nw.
Multiplier PassivityMultiplier(Index n = 1);
/// Throws unless the matrix is (ny+nw) square and Hermitian to 1e-9 relative.
Multiplier ConstantMultiplier(ComplexMatrix pi, Index ny, Index nw);
/// Entries must be Hermitian and sorted by frequency. A table that starts at
/// w >= 0 is extended to negative frequencies by Pi(-w) = conj(Pi(w)).
Multiplier TableMultiplier(std::vector<std::pair<Scalar, ComplexMatrix>> table, Index ny, Index nw);

std::string Describe(const Multiplier& m);

/// Pi(jw), symmetrized. Throws std::out_of_range outside a table's range.
ComplexMatrix EvalMultiplier(const Multiplier& m, Scalar omega);
/// As EvalMultiplier, but clamps table queries to the nearest entry and
/// appends a warning for each clamped frequency.
ComplexMatrix EvalMultiplierClamped(const Multiplier& m, Scalar omega,
                                    std::vector<std::string>* warnings);

/// Supremum over frequency of ||Pi(jw)||_2.
Scalar FormBound(const Multiplier& m);

/// (1/2pi) sum_k X_k^* Pi(w_k) X_k dw with X the transform of x; x stacks
/// (y, w) channels in that order.
Scalar SigmaForm(const Multiplier& m, const Signal& x, std::vector<std::string>* warnings = nullptr);

/// M + M^2 / eps.
Scalar QuadraticContinuityConstant(Scalar form_bound, Scalar eps);

struct LtiConditionResult {
  /// -max_k lambda_max(M(w_k)) over +-grid and the w -> infinity limit.
  Scalar eps = 0;
  /// Certified upper bound on sup_w lambda_max(M(w)) minus the sampled max.
  Scalar slack = 0;
  Scalar worst_omega = 0;
  /// lambda_max of [D; I]^* Pi [D; I].
  Scalar limit_value = 0;
  /// Bound on lambda_max(M(w)) for |w| beyond the grid.
  Scalar tail_bound = 0;
  bool passed = false;
  std::vector<std::string> warnings;
};

/// Grid must be sorted, nonnegative and start at 0; it is mirrored to
/// negative frequencies. Throws std::invalid_argument for non-LTI h1.
LtiConditionResult CheckLtiCondition(const OperatorSpec& h1, const Multiplier& m,
                                     const std::vector<Scalar>& grid);

struct EmpiricalIqcResult {
  Scalar minimum = 0;
  Scalar worst_tau = 0;
  std::size_t worst_pair = 0;
  /// ||x||^2 of the stacked difference at the minimum.
  Scalar worst_scale = 0;
  long samples = 0;
  bool passed = true;
  std::vector<std::string> warnings;
};

/// Falsification test of the trajectory condition: for each pair and tau,
/// sigma([y1 - y2; tau (H2 y1 - H2 y2)]) >= -1e-9 ||x||^2.
EmpiricalIqcResult CheckIncIqcEmpirical(const OperatorSpec& h2, const Multiplier& m,
                                        const std::vector<SignalPair>& y_pairs,
                                        const std::vector<Scalar>& tau_grid);

struct IqcReport {
  Scalar eps = 0;
  Scalar eps_bar = 0;
  Scalar M = 0;
  Scalar C = 0;
  Scalar lambda = 0;
  Scalar alpha = 0;
  Scalar bound = 0;
  Scalar empirical_minimum = 0;
};

/// eps_bar = eps / (2 max(1 + alpha, 1 + alpha^2)),
/// bound = sqrt(C(eps_bar) / eps_bar * lambda^2 / (1 + lambda^2)).
IqcReport IqcGainBound(Scalar eps, const Multiplier& m, Scalar lambda, Scalar alpha);

struct IqcOptions {
  std::vector<Scalar> tau_grid = {0, 0.25, 0.5, 0.75, 1};
  /// Closed-loop cross-check pairs (inputs u); empty skips the check.
  std::vector<SignalPair> closed_loop_probes;
  SolveOptions solve;
};

/// h1 must be LTI; h2 needs a declared incremental gain. lambda is the
/// declared gain of h1 when present, else its H-infinity norm on the grid.
Verdict CertifyIqc(const OperatorSpec& h1, const OperatorSpec& h2, const Multiplier& m,
                   const std::vector<Scalar>& grid, const std::vector<SignalPair>& y_pairs,
                   const IqcOptions& options = {});

}  // namespace incstab
