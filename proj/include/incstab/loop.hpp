#pragma once

#include <stdexcept>
#include <vector>

#include "incstab/operator.hpp"
#include "incstab/signal.hpp"

namespace incstab {

struct SolveOptions {
  /// Convergence when ||e_{k+1} - e_k|| <= tolerance * (1 + ||u||).
  Scalar tolerance = 1e-8;
  int max_iterations = 10'000;
  /// Divergence when residuals fail to decrease over this many iterations.
  int divergence_window = 50;
  /// Leading residuals ignored by the contraction estimate.
  int burn_in = 3;
};

struct SolveTrace {
  int iterates = 0;
  /// ||e_{k+1} - e_k|| for each Picard step.
  std::vector<Scalar> residuals;
  bool converged = false;
  /// Geometric-mean ratio of successive residuals after burn-in.
  Scalar contraction_estimate = 0;
  /// ||e + tau H2(y) - u||, computed independently of the iteration.
  Scalar equation_residual = 0;
  Scalar absolute_tolerance = 0;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, SolveTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const SolveTrace& trace() const { return trace_; }

 private:
  SolveTrace trace_;
};

struct FeedbackSolution {
  Signal e;
  Signal y;
  SolveTrace trace;
};

/// Solves e = u - tau H2(H1(e)), y = H1(e) by plain Picard iteration from
/// e_0 = u. Throws DivergenceError with the trace when residuals stop
/// decreasing or the iteration budget runs out.
FeedbackSolution SolveFeedback(const Signal& u, const OperatorSpec& h1, const OperatorSpec& h2,
                               Scalar tau, const SolveOptions& options = {});

Scalar ContractionEstimate(const std::vector<Scalar>& residuals, int burn_in);

/// max over pairs of ||y1 - y2|| / ||u1 - u2|| for the closed loop [H1, tau H2].
GainEstimate ClosedLoopGainEstimate(const OperatorSpec& h1, const OperatorSpec& h2, Scalar tau,
                                    const std::vector<SignalPair>& pairs,
                                    const SolveOptions& options = {});

/// psi(x) = x - tan(x): the unity-feedback loop around -arctan maps u to
/// y = psi^-1(u) samplewise.
Scalar Psi(Scalar x);
/// Bisection on (-pi/2 + 1e-6, pi/2 - 1e-6) to |psi(y) - u| <= 1e-12; throws
/// std::domain_error when the bracket or the residual fails.
Scalar InversePsi(Scalar u);

struct ArctanRow {
  Scalar amplitude = 0;
  /// ||y1 - y2|| / ||u1 - u2|| for u1 = a on [0, 1), u2 = 0.
  Scalar ratio = 0;
  /// psi^-1(a), the closed-loop output on the pulse.
  Scalar output_level = 0;
  /// |z| of the SRG point of -arctan on the same pair.
  Scalar srg_radius = 0;
};

struct ArctanOptions {
  Scalar horizon = 2;
  Scalar dt = 1e-2;
};

/// Throws std::invalid_argument for amplitudes outside (0, 0.1].
std::vector<ArctanRow> ArctanExperiment(const std::vector<Scalar>& amplitudes,
                                        const ArctanOptions& options = {});

/// Least-squares slope of log(ratio) against log(amplitude).
Scalar LogLogSlope(const std::vector<ArctanRow>& rows);

}  // namespace incstab
