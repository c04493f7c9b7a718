#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "incstab/lti.hpp"
#include "incstab/region.hpp"
#include "incstab/signal.hpp"

namespace incstab {

enum class NonlinearityKind { kIdentity, kGain, kSaturation, kDeadzone, kNegArctan, kTanh };

/// Memoryless scalar map applied samplewise to every channel.
///
/// `param` is the gain for kGain, the limit for kSaturation and the half-width
/// of the dead band for kDeadzone; it is unused otherwise.
struct StaticNonlinearity {
  NonlinearityKind kind = NonlinearityKind::kIdentity;
  Scalar param = 0;

  Scalar operator()(Scalar x) const;
  /// Closed-form bounds [lo, hi] on difference quotients.
  std::pair<Scalar, Scalar> SlopeBounds() const;
  Scalar Lipschitz() const;
  bool StrictlyMonotone() const;
  /// Domain searched when inverting by bisection.
  std::pair<Scalar, Scalar> InvertibilityInterval() const;
  std::string Name() const;
};

/// Parses registry names: identity, gain, saturation, deadzone, neg_arctan, tanh.
NonlinearityKind ParseNonlinearityKind(const std::string& name);

struct OperatorNode;

/// Immutable, cheaply copyable description of an operator on signals.
class OperatorSpec {
 public:
  explicit OperatorSpec(std::shared_ptr<const OperatorNode> node);

  const OperatorNode& node() const { return *node_; }

  /// Channel counts; 0 means "any" (memoryless maps act channelwise).
  Index input_dim() const { return input_dim_; }
  Index output_dim() const { return output_dim_; }

  const std::optional<Scalar>& declared_inc_gain() const { return declared_inc_gain_; }
  const std::optional<Region>& declared_srg() const { return declared_srg_; }
  /// Human-readable caveats attached to the declarations (e.g. heuristic covers).
  const std::vector<std::string>& declaration_notes() const { return notes_; }

  OperatorSpec WithDeclaredGain(Scalar gain) const;
  OperatorSpec WithDeclaredSrg(Region region) const;
  OperatorSpec WithNote(std::string note) const;

 private:
  std::shared_ptr<const OperatorNode> node_;
  Index input_dim_ = 0;
  Index output_dim_ = 0;
  std::optional<Scalar> declared_inc_gain_;
  std::optional<Region> declared_srg_;
  std::vector<std::string> notes_;
};

struct LtiNode {
  StateSpace sys;
};
struct StaticNode {
  StaticNonlinearity fn;
};
struct ScaleNode {
  Scalar c;
  OperatorSpec inner;
};
struct SumNode {
  OperatorSpec left;
  OperatorSpec right;
};
/// [forward, tau * backward]: y = forward(e), e = u - tau * backward(y).
struct FeedbackNode {
  OperatorSpec forward;
  OperatorSpec backward;
  Scalar tau;
};
/// Arbitrary user-supplied signal map, used for probing and testing.
struct MappedNode {
  std::string name;
  std::function<Signal(const Signal&)> fn;
  Index input_dim = 0;
  Index output_dim = 0;
};

struct OperatorNode {
  std::variant<LtiNode, StaticNode, ScaleNode, SumNode, FeedbackNode, MappedNode> value;
};

/// Throws std::invalid_argument for inconsistent or non-Hurwitz realizations.
OperatorSpec MakeLti(StateSpace sys);
OperatorSpec MakeStatic(StaticNonlinearity fn);
OperatorSpec MakeStatic(NonlinearityKind kind, Scalar param = 0);
OperatorSpec Identity();
OperatorSpec NegArctan();
OperatorSpec MakeScale(Scalar c, OperatorSpec inner);
OperatorSpec MakeSum(OperatorSpec left, OperatorSpec right);
OperatorSpec MakeFeedback(OperatorSpec forward, OperatorSpec backward, Scalar tau);
OperatorSpec MakeMapped(std::string name, std::function<Signal(const Signal&)> fn,
                        Index input_dim = 0, Index output_dim = 0);
/// k / (s + a) as a first-order SISO realization.
OperatorSpec FirstOrderLag(Scalar k, Scalar a);

std::string Describe(const OperatorSpec& op);

/// Evaluates the operator from zero initial state. Feedback nodes are solved
/// by Picard iteration and propagate DivergenceError.
Signal Apply(const OperatorSpec& op, const Signal& u);

struct GainEstimate {
  Scalar gamma = 0;
  Scalar beta = 0;
  bool incremental = true;
  bool empirical = true;
  long sample_count = 0;
  /// Set when the empirical ratio exceeds the declared gain by > 1e-6 relative.
  bool declaration_violated = false;
  std::size_t worst_pair = 0;
};

/// Max of ||H(u1) - H(u2)|| / ||u1 - u2|| over the pairs (a lower bound on the
/// incremental gain). Throws on an empty list or a degenerate pair.
GainEstimate EstimateIncrementalGain(const OperatorSpec& op, const std::vector<SignalPair>& pairs);

inline constexpr Scalar kDistinctPairTolerance = 1e-12;

struct CausalityReport {
  bool causal = true;
  Scalar max_violation = 0;
  Scalar worst_horizon = 0;
};

/// Checks ||P_T H P_T u - P_T H u|| <= 1e-6 (1 + ||u||) for every T.
CausalityReport CausalityCheck(const OperatorSpec& op, const Signal& u,
                               const std::vector<Scalar>& horizons);

/// Solves H(e) = y for e. Supports strictly monotone static maps (bisection),
/// nonzero scalings of invertible operators, and LTI blocks with invertible D.
Signal RelationalInverseApply(const OperatorSpec& op, const Signal& y);

/// Bisection of f(x) = target on [lo, hi] for monotone f.
Scalar BisectMonotone(const std::function<Scalar(Scalar)>& f, Scalar target, Scalar lo,
                      Scalar hi, Scalar residual_tol, int max_iterations = 400);

}  // namespace incstab
